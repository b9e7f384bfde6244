//! Plain-text PGM (P2) rendering of a verdict rectangle.
//!
//! Column `n` is the Spoiler counter and row `0` is the largest Duplicator counter,
//! so the picture has the usual orientation of the plane.

use std::fmt::Write;

use ocnsim::belt::BeltSpec;

pub const SIMULATED: u8 = 255;
pub const NOT_SIMULATED: u8 = 0;
pub const UNKNOWN: u8 = 128;
pub const BOUNDARY: u8 = 64;

/// Gray values indexed `[row][column]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub pixels: Vec<Vec<u8>>,
}

impl Image {
    /// `decide(n, n2)` for every `n ≤ max_n`, `n2 ≤ max_n2`.
    pub fn render(max_n: u64, max_n2: u64, mut decide: impl FnMut(u64, u64) -> Option<bool>) -> Image {
        let pixels = (0..=max_n2)
            .rev()
            .map(|n2| {
                (0..=max_n)
                    .map(|n| match decide(n, n2) {
                        Some(true) => SIMULATED,
                        Some(false) => NOT_SIMULATED,
                        None => UNKNOWN,
                    })
                    .collect()
            })
            .collect();
        Image { pixels }
    }

    pub fn at(&self, n: u64, n2: u64) -> u8 {
        let top = self.pixels.len() as u64 - 1;
        self.pixels[(top - n2) as usize][n as usize]
    }

    /// Marks the first point of each column that lies above the Duplicator boundary and
    /// the last point that lies below the Spoiler boundary.
    pub fn overlay(&mut self, belt: &BeltSpec) {
        let (w, h) = (self.pixels[0].len() as u64, self.pixels.len() as u64);
        let top = h - 1;
        for n in 0..w {
            let above = (0..h).find(|&n2| belt.classify((n, n2)) == Some(true));
            let below = (0..h).rev().find(|&n2| belt.classify((n, n2)) == Some(false));
            for n2 in above.into_iter().chain(below) {
                self.pixels[(top - n2) as usize][n as usize] = BOUNDARY;
            }
        }
    }

    pub fn to_pgm(&self) -> String {
        let mut out = String::new();
        writeln!(out, "P2\n{} {}\n255", self.pixels[0].len(), self.pixels.len()).unwrap();
        for row in &self.pixels {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }
}
