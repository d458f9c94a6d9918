//! Natural-language navigation: a 3×3 vertex grid described in snake order
//! with one landmark per vertex, plus a random walk whose end landmark is the
//! answer. The ring variant places landmarks on a cycle and moves by signed
//! step counts.

pub mod vocab;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{step, Coord, Direction};
use crate::rng::stream;

pub use vocab::LANDMARKS;

pub const GRID_SIDE: usize = 3;
pub const DEFAULT_RING_SIZE: usize = 12;
pub const SQUARE_TEMPLATE_VERSION: &str = "square-v1";
pub const RING_TEMPLATE_VERSION: &str = "ring-v1-reconstructed";

/// Vertex of the `i`-th landmark in snake order: start bottom-left, go right
/// along the bottom row, up, left along the middle row, up, right.
pub fn snake_position(i: usize) -> Coord {
    let band = i / GRID_SIDE;
    let offset = i % GRID_SIDE;
    let col = if band.is_multiple_of(2) {
        offset
    } else {
        GRID_SIDE - 1 - offset
    };
    Coord::new(GRID_SIDE - 1 - band, col)
}

pub fn snake_index(c: Coord) -> Option<usize> {
    if c.row >= GRID_SIDE || c.col >= GRID_SIDE {
        return None;
    }
    let band = GRID_SIDE - 1 - c.row;
    let offset = if band.is_multiple_of(2) {
        c.col
    } else {
        GRID_SIDE - 1 - c.col
    };
    Some(band * GRID_SIDE + offset)
}

/// Nine distinct landmarks in snake order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LandmarkMap {
    landmarks: Vec<String>,
}

impl LandmarkMap {
    pub fn new(landmarks: Vec<String>) -> Result<Self> {
        if landmarks.len() != GRID_SIDE * GRID_SIDE {
            return Err(Error::Invalid(format!(
                "a landmark map needs {} names, got {}",
                GRID_SIDE * GRID_SIDE,
                landmarks.len()
            )));
        }
        for (i, a) in landmarks.iter().enumerate() {
            if landmarks[..i].contains(a) {
                return Err(Error::Invalid(format!("duplicate landmark `{a}`")));
            }
        }
        Ok(LandmarkMap { landmarks })
    }

    pub fn landmarks(&self) -> &[String] {
        &self.landmarks
    }

    pub fn name_at(&self, c: Coord) -> Option<&str> {
        snake_index(c).map(|i| self.landmarks[i].as_str())
    }

    pub fn position_of(&self, name: &str) -> Option<Coord> {
        self.landmarks
            .iter()
            .position(|l| l == name)
            .map(snake_position)
    }
}

pub fn generate_landmark_map<R: Rng>(rng: &mut R, vocab: &[&str]) -> Result<LandmarkMap> {
    let n = GRID_SIDE * GRID_SIDE;
    let names = sample_names(rng, vocab, n)?;
    LandmarkMap::new(names)
}

fn sample_names<R: Rng>(rng: &mut R, vocab: &[&str], n: usize) -> Result<Vec<String>> {
    let mut distinct: Vec<&str> = Vec::with_capacity(vocab.len());
    for v in vocab {
        if !distinct.contains(v) {
            distinct.push(v);
        }
    }
    if distinct.len() < n {
        return Err(Error::Config(format!(
            "vocabulary has {} distinct names, need at least {n}",
            distinct.len()
        )));
    }
    Ok(index::sample(rng, distinct.len(), n)
        .into_iter()
        .map(|i| distinct[i].to_string())
        .collect())
}

/// English indefinite article for a landmark name.
pub fn article(name: &str) -> &'static str {
    let lower = name.to_lowercase();
    let consonant_sound = ["uni", "use", "eu", "one"];
    let vowel_sound = ["hour", "honest", "heir"];
    if vowel_sound.iter().any(|p| lower.starts_with(p)) {
        return "an";
    }
    if consonant_sound.iter().any(|p| lower.starts_with(p)) {
        return "a";
    }
    match lower.chars().next() {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

fn with_article(name: &str) -> String {
    format!("{} {name}", article(name))
}

/// Follow unit moves over the vertex grid; `None` if a move leaves it.
pub fn execute_walk(start: Coord, dirs: &[Direction]) -> Option<Coord> {
    dirs.iter().try_fold(start, |c, &d| {
        step(c, d).filter(|n| n.row < GRID_SIDE && n.col < GRID_SIDE)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NlNavInstance {
    pub map: LandmarkMap,
    pub start_object: String,
    pub instructions: Vec<Direction>,
    pub gold_object: String,
    pub prompt_text: String,
}

/// Map description and question in the benchmark's fixed wording.
pub fn render_square_prompt(map: &LandmarkMap, start_object: &str, dirs: &[Direction]) -> String {
    let names = map.landmarks();
    let mut s = format!(
        "You have been given a {GRID_SIDE} by {GRID_SIDE} square grid. Starting from a vertex, you will move along the edges of the grid. Initially, you are positioned at the bottom-left corner of the grid, where you will find {}",
        with_article(&names[0])
    );
    for (i, name) in names.iter().enumerate().skip(1) {
        let (a, b) = (snake_position(i - 1), snake_position(i));
        let d = if b.row < a.row {
            Direction::Up
        } else if b.col > a.col {
            Direction::Right
        } else {
            Direction::Left
        };
        if d == Direction::Up {
            s.push_str(". Then you go up");
        } else {
            s.push_str(&format!(", then you go {d}"));
        }
        s.push_str(&format!(", where you will find {}", with_article(name)));
    }
    s.push_str(". Now you have all the information on the map. ");
    s.push_str(&format!(
        "You start at the position where the {start_object} is located"
    ));
    for (i, d) in dirs.iter().enumerate() {
        let joiner = if i + 1 == dirs.len() {
            ", and then"
        } else {
            ", then"
        };
        s.push_str(&format!("{joiner} you go {d} by one step"));
    }
    s.push_str(". What will you find?");
    s
}

/// A random walk of `walk_len` unit moves from a uniformly chosen landmark;
/// each move is uniform over the directions that stay on the grid.
pub fn generate_walk<R: Rng>(
    map: &LandmarkMap,
    rng: &mut R,
    walk_len: usize,
) -> Result<NlNavInstance> {
    if walk_len == 0 {
        return Err(Error::Invalid("walk length must be positive".into()));
    }
    let start_idx = rng.gen_range(0..map.landmarks.len());
    let mut pos = snake_position(start_idx);
    let mut instructions = Vec::with_capacity(walk_len);
    for _ in 0..walk_len {
        let options: Vec<Direction> = Direction::ALL
            .into_iter()
            .filter(|&d| execute_walk(pos, &[d]).is_some())
            .collect();
        let d = *options.choose(rng).expect("every vertex has a neighbour");
        pos = execute_walk(pos, &[d]).expect("filtered above");
        instructions.push(d);
    }
    let start_object = map.landmarks[start_idx].clone();
    Ok(NlNavInstance {
        prompt_text: render_square_prompt(map, &start_object, &instructions),
        gold_object: map.name_at(pos).expect("walk stays on grid").to_string(),
        map: map.clone(),
        start_object,
        instructions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rotation {
    Clockwise,
    Counterclockwise,
}

impl Rotation {
    pub fn phrase(self) -> &'static str {
        match self {
            Rotation::Clockwise => "clockwise",
            Rotation::Counterclockwise => "counterclockwise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingMove {
    pub rotation: Rotation,
    pub steps: u32,
}

impl RingMove {
    pub fn cw(steps: u32) -> Self {
        RingMove {
            rotation: Rotation::Clockwise,
            steps,
        }
    }

    pub fn ccw(steps: u32) -> Self {
        RingMove {
            rotation: Rotation::Counterclockwise,
            steps,
        }
    }
}

/// `(Σ clockwise − Σ counterclockwise) mod ring_size`, clockwise positive.
pub fn normalize_ring(moves: &[RingMove], ring_size: usize) -> usize {
    assert!(ring_size > 0, "ring size must be positive");
    let net: i64 = moves
        .iter()
        .map(|m| match m.rotation {
            Rotation::Clockwise => i64::from(m.steps),
            Rotation::Counterclockwise => -i64::from(m.steps),
        })
        .sum();
    net.rem_euclid(ring_size as i64) as usize
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingNavInstance {
    pub ring_size: usize,
    /// Landmarks in clockwise order.
    pub landmarks: Vec<String>,
    pub start_index: usize,
    pub moves: Vec<RingMove>,
    pub gold_object: String,
    pub prompt_text: String,
}

pub fn render_ring_prompt(landmarks: &[String], start_index: usize, moves: &[RingMove]) -> String {
    let mut s = format!(
        "You have been given a ring of {} positions. Starting from a position, you will move along the ring. Initially, you are positioned at a position where you will find {}",
        landmarks.len(),
        with_article(&landmarks[0])
    );
    for name in &landmarks[1..] {
        s.push_str(&format!(
            ", then you go clockwise by one step, where you will find {}",
            with_article(name)
        ));
    }
    s.push_str(". Going clockwise by one more step brings you back to the first position. Now you have all the information on the ring. ");
    s.push_str(&format!(
        "You start at the position where the {} is located",
        landmarks[start_index]
    ));
    for (i, m) in moves.iter().enumerate() {
        let joiner = if i + 1 == moves.len() {
            ", and then"
        } else {
            ", then"
        };
        let unit = if m.steps == 1 { "step" } else { "steps" };
        s.push_str(&format!(
            "{joiner} you go {} by {} {unit}",
            m.rotation.phrase(),
            m.steps
        ));
    }
    s.push_str(". What will you find?");
    s
}

/// Ring of `ring_size` landmarks with 2 to 4 moves of 1 to 24 steps each.
pub fn generate_ring<R: Rng>(
    rng: &mut R,
    vocab: &[&str],
    ring_size: usize,
) -> Result<RingNavInstance> {
    if ring_size < 2 {
        return Err(Error::Invalid("ring size must be at least 2".into()));
    }
    let landmarks = sample_names(rng, vocab, ring_size)?;
    let start_index = rng.gen_range(0..ring_size);
    let n_moves = rng.gen_range(2..=4);
    let moves: Vec<RingMove> = (0..n_moves)
        .map(|_| RingMove {
            rotation: if rng.gen_bool(0.5) {
                Rotation::Clockwise
            } else {
                Rotation::Counterclockwise
            },
            steps: rng.gen_range(1..=2 * ring_size as u32),
        })
        .collect();
    let gold = (start_index + normalize_ring(&moves, ring_size)) % ring_size;
    Ok(RingNavInstance {
        ring_size,
        prompt_text: render_ring_prompt(&landmarks, start_index, &moves),
        gold_object: landmarks[gold].clone(),
        landmarks,
        start_index,
        moves,
    })
}

/// JSONL line of the square natural-language navigation dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NlNavRecord {
    pub id: String,
    pub task: String,
    pub variant: String,
    pub prompt_text: String,
    pub gold_object: String,
    pub seed: u64,
    pub template_version: String,
    pub start_object: String,
    pub instructions: Vec<Direction>,
    pub landmarks: Vec<String>,
}

/// JSONL line of the ring navigation dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingRecord {
    pub id: String,
    pub task: String,
    pub variant: String,
    pub prompt_text: String,
    pub gold_object: String,
    pub seed: u64,
    pub template_version: String,
    pub ring_size: usize,
    pub start_index: usize,
    pub moves: Vec<RingMove>,
    pub landmarks: Vec<String>,
}

/// `count` maps with one walk each; walk lengths uniform in `walk_len`.
pub fn generate_nlnav_dataset(
    seed: u64,
    count: usize,
    walk_len: std::ops::RangeInclusive<usize>,
    vocab: &[&str],
) -> Result<Vec<NlNavRecord>> {
    if walk_len.is_empty() || *walk_len.start() == 0 {
        return Err(Error::Invalid(
            "walk length range must be non-empty and positive".into(),
        ));
    }
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, "nlnav", i as u64);
            let map = generate_landmark_map(&mut rng, vocab)?;
            let len = rng.gen_range(walk_len.clone());
            let inst = generate_walk(&map, &mut rng, len)?;
            Ok(NlNavRecord {
                id: format!("nlnav-{i:04}"),
                task: "nl_navigation".into(),
                variant: "square".into(),
                prompt_text: inst.prompt_text,
                gold_object: inst.gold_object,
                seed,
                template_version: SQUARE_TEMPLATE_VERSION.into(),
                start_object: inst.start_object,
                instructions: inst.instructions,
                landmarks: inst.map.landmarks,
            })
        })
        .collect()
}

pub fn generate_ring_dataset(
    seed: u64,
    count: usize,
    ring_size: usize,
    vocab: &[&str],
) -> Result<Vec<RingRecord>> {
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, "ring", i as u64);
            let inst = generate_ring(&mut rng, vocab, ring_size)?;
            Ok(RingRecord {
                id: format!("ring-{i:04}"),
                task: "ring_navigation".into(),
                variant: "ring".into(),
                prompt_text: inst.prompt_text,
                gold_object: inst.gold_object,
                seed,
                template_version: RING_TEMPLATE_VERSION.into(),
                ring_size: inst.ring_size,
                start_index: inst.start_index,
                moves: inst.moves,
                landmarks: inst.landmarks,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Direction::*;

    fn example_map() -> LandmarkMap {
        LandmarkMap::new(
            [
                "torch",
                "infant bed",
                "American dipper",
                "jay",
                "terrapin",
                "microwave oven",
                "baseball player",
                "harvestman",
                "neck brace",
            ]
            .map(String::from)
            .to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn snake_order() {
        assert_eq!(snake_position(0), Coord::new(2, 0));
        assert_eq!(snake_position(2), Coord::new(2, 2));
        assert_eq!(snake_position(3), Coord::new(1, 2));
        assert_eq!(snake_position(5), Coord::new(1, 0));
        assert_eq!(snake_position(6), Coord::new(0, 0));
        assert_eq!(snake_position(8), Coord::new(0, 2));
        for i in 0..9 {
            assert_eq!(snake_index(snake_position(i)), Some(i));
        }
    }

    #[test]
    fn example_prompt_is_reproduced() {
        let map = example_map();
        let walk = [Right, Right, Up, Up, Left, Down, Down];
        let expected = "You have been given a 3 by 3 square grid. Starting from a vertex, you will move along the edges of the grid. Initially, you are positioned at the bottom-left corner of the grid, where you will find a torch, then you go right, where you will find an infant bed, then you go right, where you will find an American dipper. Then you go up, where you will find a jay, then you go left, where you will find a terrapin, then you go left, where you will find a microwave oven. Then you go up, where you will find a baseball player, then you go right, where you will find a harvestman, then you go right, where you will find a neck brace. Now you have all the information on the map. You start at the position where the torch is located, then you go right by one step, then you go right by one step, then you go up by one step, then you go up by one step, then you go left by one step, then you go down by one step, and then you go down by one step. What will you find?";
        assert_eq!(render_square_prompt(&map, "torch", &walk), expected);
    }

    #[test]
    fn example_walk_ends_at_infant_bed() {
        let map = example_map();
        let end = execute_walk(
            map.position_of("torch").unwrap(),
            &[Right, Right, Up, Up, Left, Down, Down],
        )
        .unwrap();
        assert_eq!(map.name_at(end), Some("infant bed"));
    }

    #[test]
    fn walks_stay_on_grid_and_cancel() {
        let start = Coord::new(1, 1);
        assert_eq!(execute_walk(start, &[Right, Left]), Some(start));
        assert_eq!(execute_walk(Coord::new(0, 0), &[Up]), None);
        assert_eq!(execute_walk(Coord::new(2, 2), &[Right]), None);
        let mut rng = stream(3, "t", 0);
        let map = generate_landmark_map(&mut rng, LANDMARKS).unwrap();
        for len in 1..12 {
            let inst = generate_walk(&map, &mut rng, len).unwrap();
            let end = execute_walk(
                map.position_of(&inst.start_object).unwrap(),
                &inst.instructions,
            )
            .unwrap();
            assert_eq!(map.name_at(end), Some(inst.gold_object.as_str()));
        }
        assert!(generate_walk(&map, &mut rng, 0).is_err());
    }

    #[test]
    fn map_generation_is_deterministic() {
        let a = generate_landmark_map(&mut stream(1, "m", 0), LANDMARKS).unwrap();
        let b = generate_landmark_map(&mut stream(1, "m", 0), LANDMARKS).unwrap();
        assert_eq!(a, b);
        assert!(generate_landmark_map(&mut stream(1, "m", 0), &["a", "b"]).is_err());
    }

    #[test]
    fn articles() {
        assert_eq!(article("infant bed"), "an");
        assert_eq!(article("American dipper"), "an");
        assert_eq!(article("torch"), "a");
        assert_eq!(article("unicycle"), "a");
        assert_eq!(article("hourglass"), "an");
    }

    #[test]
    fn ring_residues() {
        assert_eq!(normalize_ring(&[RingMove::cw(15), RingMove::ccw(3)], 12), 0);
        assert_eq!(normalize_ring(&[], 12), 0);
        assert_eq!(normalize_ring(&[RingMove::ccw(1)], 12), 11);
    }

    #[test]
    fn ring_gold_matches_residue() {
        for i in 0..50 {
            let r = generate_ring(&mut stream(9, "ring", i), LANDMARKS, 12).unwrap();
            let gold = (r.start_index + normalize_ring(&r.moves, 12)) % 12;
            assert_eq!(r.landmarks[gold], r.gold_object);
            assert!((2..=4).contains(&r.moves.len()));
        }
    }

    #[test]
    fn single_step_phrase() {
        let p = render_square_prompt(&example_map(), "torch", &[Right]);
        assert!(
            p.ends_with("torch is located, and then you go right by one step. What will you find?")
        );
    }
}
