//! Embedded 5x7 lowercase bitmap font, scaled nearest-neighbour to the
//! configured font size.

use crate::model::FontFamily;

const GLYPH_W: usize = 5;
const GLYPH_H: usize = 7;

#[rustfmt::skip]
const GLYPHS: [[&str; GLYPH_H]; 26] = [
    [".....", ".....", ".###.", "....#", ".####", "#...#", ".####"], // a
    ["#....", "#....", "#.##.", "##..#", "#...#", "#...#", "####."], // b
    [".....", ".....", ".###.", "#....", "#....", "#...#", ".###."], // c
    ["....#", "....#", ".##.#", "#..##", "#...#", "#...#", ".####"], // d
    [".....", ".....", ".###.", "#...#", "#####", "#....", ".###."], // e
    ["..##.", ".#..#", ".#...", "###..", ".#...", ".#...", ".#..."], // f
    [".....", ".####", "#...#", "#...#", ".####", "....#", ".###."], // g
    ["#....", "#....", "#.##.", "##..#", "#...#", "#...#", "#...#"], // h
    ["..#..", ".....", ".##..", "..#..", "..#..", "..#..", ".###."], // i
    ["...#.", ".....", "..##.", "...#.", "...#.", "#..#.", ".##.."], // j
    ["#....", "#....", "#..#.", "#.#..", "##...", "#.#..", "#..#."], // k
    [".##..", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."], // l
    [".....", ".....", "##.#.", "#.#.#", "#.#.#", "#...#", "#...#"], // m
    [".....", ".....", "#.##.", "##..#", "#...#", "#...#", "#...#"], // n
    [".....", ".....", ".###.", "#...#", "#...#", "#...#", ".###."], // o
    [".....", ".....", "####.", "#...#", "####.", "#....", "#...."], // p
    [".....", ".....", ".##.#", "#..##", ".####", "....#", "....#"], // q
    [".....", ".....", "#.##.", "##..#", "#....", "#....", "#...."], // r
    [".....", ".....", ".###.", "#....", ".###.", "....#", "####."], // s
    [".#...", ".#...", "###..", ".#...", ".#...", ".#..#", "..##."], // t
    [".....", ".....", "#...#", "#...#", "#...#", "#..##", ".##.#"], // u
    [".....", ".....", "#...#", "#...#", "#...#", ".#.#.", "..#.."], // v
    [".....", ".....", "#...#", "#...#", "#.#.#", "#.#.#", ".#.#."], // w
    [".....", ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#"], // x
    [".....", ".....", "#...#", "#...#", ".####", "....#", ".###."], // y
    [".....", ".....", "#####", "...#.", "..#..", ".#...", "#####"], // z
];

fn glyph_bit(c: char, gx: usize, gy: usize) -> bool {
    let idx = (c as u8).wrapping_sub(b'a') as usize;
    GLYPHS
        .get(idx)
        .map(|g| g[gy].as_bytes()[gx] == b'#')
        .unwrap_or(false)
}

/// Pixel metrics of the font at a given size and family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FontMetrics {
    pub glyph_width: usize,
    pub glyph_height: usize,
    /// Blank columns between consecutive glyphs.
    pub letter_spacing: usize,
    /// Extra ink columns to the right of each stroke pixel.
    pub weight: usize,
    pub line_height: usize,
}

impl FontMetrics {
    pub fn new(size: u32, family: FontFamily) -> Self {
        let s = size.max(1) as f64;
        let (wf, sf, weight) = match family {
            FontFamily::Sans => (0.5, 0.1, 0),
            FontFamily::Serif => (0.45, 0.06, 1),
            FontFamily::Mono => (0.6, 0.1, 0),
        };
        let glyph_width = (s * wf).round().max(1.0) as usize;
        let glyph_height = (s * 0.7).round().max(1.0) as usize;
        FontMetrics {
            glyph_width,
            glyph_height,
            letter_spacing: ((s * sf).round() as usize).max(1),
            weight,
            line_height: (size.max(1) as usize).max(glyph_height + 1),
        }
    }

    pub fn advance(&self) -> usize {
        self.glyph_width + self.letter_spacing
    }

    pub fn word_width(&self, chars: usize) -> usize {
        if chars == 0 {
            0
        } else {
            chars * self.advance() - self.letter_spacing
        }
    }

    /// Calls `ink(dx, dy)` for every black pixel of `c`, relative to the
    /// glyph's top-left corner.
    pub fn for_each_ink(&self, c: char, mut ink: impl FnMut(usize, usize)) {
        for py in 0..self.glyph_height {
            let gy = py * GLYPH_H / self.glyph_height;
            for px in 0..self.glyph_width {
                let gx = px * GLYPH_W / self.glyph_width;
                if glyph_bit(c, gx, gy) {
                    for w in 0..=self.weight {
                        ink(px + w, py);
                    }
                }
            }
        }
    }
}
