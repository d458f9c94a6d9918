#![allow(dead_code)]

pub mod fixtures;
pub mod nav_oracle;
pub mod tiling_oracle;
