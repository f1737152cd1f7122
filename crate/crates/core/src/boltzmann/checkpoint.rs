//! Plain-text DBM checkpoints. Floating-point values are stored as the
//! hexadecimal bit pattern of the `f64`, so a round trip is bit-exact.
//!
//! ```text
//! TACTILE-DBM-CHECKPOINT 1
//! seed 42
//! config learning_rate 0.01
//! layers 18 18 18
//! mask1            (one line of 0/1 per pre-layer unit)
//! mask2
//! w1               (one line of hex words per row)
//! w2
//! visible_bias     (one line of hex words)
//! hidden1_bias
//! hidden2_bias
//! end
//! ```

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::DbmParams;
use crate::connectivity::ConnectivityMask;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "TACTILE-DBM-CHECKPOINT";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: DbmParams,
    pub seed: u64,
    /// Key/value echo of the configuration that produced the parameters.
    pub config: Vec<(String, String)>,
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        writeln!(out, "{CHECKPOINT_MAGIC} {VERSION}").unwrap();
        writeln!(out, "seed {}", self.seed).unwrap();
        for (k, v) in &self.config {
            writeln!(out, "config {k} {v}").unwrap();
        }
        writeln!(out, "layers {} {} {}", p.n_visible(), p.n_hidden1(), p.n_hidden2()).unwrap();
        write_mask(&mut out, "mask1", &p.mask1);
        write_mask(&mut out, "mask2", &p.mask2);
        write_matrix(&mut out, "w1", &p.w1);
        write_matrix(&mut out, "w2", &p.w2);
        write_vector(&mut out, "visible_bias", &p.visible_bias);
        write_vector(&mut out, "hidden1_bias", &p.hidden1_bias);
        write_vector(&mut out, "hidden2_bias", &p.hidden2_bias);
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);

        let (n, header) = lines.next_line()?;
        let version = header
            .strip_prefix(CHECKPOINT_MAGIC)
            .map(str::trim)
            .ok_or_else(|| Error::parse(n, "missing checkpoint header"))?;
        if version != VERSION.to_string() {
            return Err(Error::parse(n, format!("unsupported checkpoint version {version}")));
        }

        let (n, seed_line) = lines.next_line()?;
        let seed = seed_line
            .strip_prefix("seed ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::parse(n, "expected `seed <u64>`"))?;

        let mut config = Vec::new();
        let (mut n, mut line) = lines.next_line()?;
        while let Some(rest) = line.strip_prefix("config ") {
            let (k, v) = rest
                .split_once(' ')
                .ok_or_else(|| Error::parse(n, "expected `config <key> <value>`"))?;
            config.push((k.to_string(), v.to_string()));
            (n, line) = lines.next_line()?;
        }

        let dims: Vec<usize> = line
            .strip_prefix("layers ")
            .map(|s| {
                s.split_whitespace()
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
            })
            .transpose()
            .map_err(|_| Error::parse(n, "bad layer sizes"))?
            .filter(|d: &Vec<usize>| d.len() == 3)
            .ok_or_else(|| Error::parse(n, "expected `layers <v> <h1> <h2>`"))?;
        let (nv, n1, n2) = (dims[0], dims[1], dims[2]);

        let mask1 = lines.mask("mask1", nv, n1)?;
        let mask2 = lines.mask("mask2", n1, n2)?;
        let w1 = lines.matrix("w1", nv, n1)?;
        let w2 = lines.matrix("w2", n1, n2)?;
        let visible_bias = lines.vector("visible_bias", nv)?;
        let hidden1_bias = lines.vector("hidden1_bias", n1)?;
        let hidden2_bias = lines.vector("hidden2_bias", n2)?;
        lines.expect("end")?;

        let params = DbmParams {
            w1,
            w2,
            visible_bias,
            hidden1_bias,
            hidden2_bias,
            mask1,
            mask2,
        };
        for (w, m, name) in [(&params.w1, &params.mask1, "w1"), (&params.w2, &params.mask2, "w2")] {
            if w.indexed_iter().any(|(ij, &x)| x != 0.0 && !m.allowed()[ij]) {
                return Err(Error::parse(0, format!("{name} has weights outside its mask")));
            }
        }
        Ok(Self { params, seed, config })
    }

    pub fn config_value(&self, key: &str) -> Option<&str> {
        self.config.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn write_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    std::fs::write(path, checkpoint.to_text())?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::parse(&std::fs::read_to_string(path)?)
}

fn hex(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

fn write_mask(out: &mut String, name: &str, mask: &ConnectivityMask) {
    writeln!(out, "{name}").unwrap();
    for row in mask.allowed().rows() {
        let line: String = row.iter().map(|&a| if a { '1' } else { '0' }).collect();
        writeln!(out, "{line}").unwrap();
    }
}

fn write_matrix(out: &mut String, name: &str, m: &Array2<f64>) {
    writeln!(out, "{name}").unwrap();
    for row in m.rows() {
        let words: Vec<String> = row.iter().map(|&x| hex(x)).collect();
        writeln!(out, "{}", words.join(" ")).unwrap();
    }
}

fn write_vector(out: &mut String, name: &str, v: &Array1<f64>) {
    writeln!(out, "{name}").unwrap();
    let words: Vec<String> = v.iter().map(|&x| hex(x)).collect();
    writeln!(out, "{}", words.join(" ")).unwrap();
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
        }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .ok_or_else(|| Error::parse(0, "unexpected end of checkpoint"))
    }

    fn expect(&mut self, tag: &str) -> Result<()> {
        let (n, line) = self.next_line()?;
        if line != tag {
            return Err(Error::parse(n, format!("expected `{tag}`, found `{line}`")));
        }
        Ok(())
    }

    fn words(&mut self, len: usize) -> Result<Vec<f64>> {
        let (n, line) = self.next_line()?;
        let words: Vec<f64> = line
            .split_whitespace()
            .map(|w| u64::from_str_radix(w, 16).map(f64::from_bits))
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(n, "expected hexadecimal f64 words"))?;
        if words.len() != len {
            return Err(Error::parse(n, format!("expected {len} values, found {}", words.len())));
        }
        if words.iter().any(|x| !x.is_finite()) {
            return Err(Error::parse(n, "non-finite parameter"));
        }
        Ok(words)
    }

    fn mask(&mut self, tag: &str, rows: usize, cols: usize) -> Result<ConnectivityMask> {
        self.expect(tag)?;
        let mut allowed = Array2::from_elem((rows, cols), false);
        for i in 0..rows {
            let (n, line) = self.next_line()?;
            if line.len() != cols {
                return Err(Error::parse(n, format!("mask row must have {cols} entries")));
            }
            for (j, ch) in line.chars().enumerate() {
                allowed[[i, j]] = match ch {
                    '0' => false,
                    '1' => true,
                    _ => return Err(Error::parse(n, "mask entries must be 0 or 1")),
                };
            }
        }
        Ok(ConnectivityMask::from_allowed(allowed))
    }

    fn matrix(&mut self, tag: &str, rows: usize, cols: usize) -> Result<Array2<f64>> {
        self.expect(tag)?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.words(cols)?);
        }
        Ok(Array2::from_shape_vec((rows, cols), data).expect("shape checked"))
    }

    fn vector(&mut self, tag: &str, len: usize) -> Result<Array1<f64>> {
        self.expect(tag)?;
        Ok(Array1::from(self.words(len)?))
    }
}
