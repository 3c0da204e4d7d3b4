//! Variable identifiers.
//!
//! A `Var` is a small integer with a fixed, stateless name mapping, so two
//! independently parsed expressions always agree on identities and ordering.
//! Lower index means "larger" in lexicographic comparisons (x > y > z > w).

use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(u16);

const LETTER_BASE: u16 = 4;
const INDEXED_BASE: u16 = 100;
const AUX_BASE: u16 = 2000;
const OTHER_LETTERS: &[u8] = b"abcdefghijklmnopqrstuv";

impl Var {
    pub const X: Var = Var(0);
    pub const Y: Var = Var(1);
    pub const Z: Var = Var(2);
    pub const W: Var = Var(3);

    /// `x1`, `x2`, ... used for n-dimensional coordinates.
    pub fn indexed(k: u16) -> Var {
        assert!((1..AUX_BASE - INDEXED_BASE).contains(&k), "indexed variable out of range");
        Var(INDEXED_BASE + k)
    }

    /// Internal symbols (time parameters and the like). Never produced by the parser.
    pub fn aux(k: u16) -> Var {
        Var(AUX_BASE + k)
    }

    pub fn is_aux(self) -> bool {
        self.0 >= AUX_BASE
    }

    pub fn index(self) -> u16 {
        self.0
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "x" => return Some(Var::X),
            "y" => return Some(Var::Y),
            "z" => return Some(Var::Z),
            "w" => return Some(Var::W),
            _ => {}
        }
        let bytes = name.as_bytes();
        if bytes.len() == 1 {
            return OTHER_LETTERS
                .iter()
                .position(|&c| c == bytes[0])
                .map(|p| Var(LETTER_BASE + p as u16));
        }
        if bytes[0] == b'x' && bytes.len() > 1 && bytes[1..].iter().all(u8::is_ascii_digit) && bytes[1] != b'0' {
            let k: u16 = name[1..].parse().ok()?;
            if k < AUX_BASE - INDEXED_BASE {
                return Some(Var::indexed(k));
            }
        }
        None
    }

    pub fn name(self) -> String {
        match self.0 {
            0 => "x".into(),
            1 => "y".into(),
            2 => "z".into(),
            3 => "w".into(),
            i if (LETTER_BASE..LETTER_BASE + OTHER_LETTERS.len() as u16).contains(&i) => {
                (OTHER_LETTERS[(i - LETTER_BASE) as usize] as char).to_string()
            }
            i if (INDEXED_BASE..AUX_BASE).contains(&i) => format!("x{}", i - INDEXED_BASE),
            i => format!("_t{}", i - AUX_BASE),
        }
    }

    /// Standard coordinate names for an n-dimensional space:
    /// x, y, z, w up to four dimensions, then x1..xn.
    pub fn coords(n: usize) -> Vec<Var> {
        match n {
            0..=4 => [Var::X, Var::Y, Var::Z, Var::W][..n].to_vec(),
            _ => (1..=n as u16).map(Var::indexed).collect(),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
