use std::collections::HashSet;

use spatial_eval::Direction;

/// Every simple path from S to D over non-`#` cells of a rendered ascii map.
pub fn all_simple_paths(text: &str) -> Vec<Vec<(usize, usize)>> {
    let rows: Vec<Vec<char>> = text.lines().map(|l| l.chars().collect()).collect();
    let find = |ch: char| {
        rows.iter()
            .enumerate()
            .find_map(|(r, row)| row.iter().position(|&c| c == ch).map(|c| (r, c)))
            .expect("glyph present")
    };
    let (start, dest) = (find('S'), find('D'));
    let mut out = Vec::new();
    let mut path = vec![start];
    let mut seen = HashSet::from([start]);
    fn dfs(
        rows: &[Vec<char>],
        dest: (usize, usize),
        path: &mut Vec<(usize, usize)>,
        seen: &mut HashSet<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        let (r, c) = *path.last().unwrap();
        if (r, c) == dest {
            out.push(path.clone());
            return;
        }
        let cand = [
            (r.wrapping_sub(1), c),
            (r + 1, c),
            (r, c.wrapping_sub(1)),
            (r, c + 1),
        ];
        for (nr, nc) in cand {
            let Some(&ch) = rows.get(nr).and_then(|row| row.get(nc)) else {
                continue;
            };
            if ch == '#' || seen.contains(&(nr, nc)) {
                continue;
            }
            seen.insert((nr, nc));
            path.push((nr, nc));
            dfs(rows, dest, path, seen, out);
            path.pop();
            seen.remove(&(nr, nc));
        }
    }
    dfs(&rows, dest, &mut path, &mut seen, &mut out);
    out
}

/// Compress a cell path into its sequence of straight-segment directions.
pub fn segment_directions(path: &[(usize, usize)]) -> Vec<Direction> {
    let mut dirs: Vec<Direction> = Vec::new();
    for w in path.windows(2) {
        let d = match (w[1].0 as i64 - w[0].0 as i64, w[1].1 as i64 - w[0].1 as i64) {
            (-1, 0) => Direction::Up,
            (1, 0) => Direction::Down,
            (0, -1) => Direction::Left,
            (0, 1) => Direction::Right,
            other => panic!("non-adjacent step {other:?}"),
        };
        if dirs.last() != Some(&d) {
            dirs.push(d);
        }
    }
    dirs
}
