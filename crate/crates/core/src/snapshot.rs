//! Plain-text snapshots of spin and bond configurations.
//!
//! `ising-snapshot v1`: a header `n=<n> beta=<f64> h=<f64> seed=<u64>`
//! followed by `2n + 1` rows of `+`/`-`, top row (`y = n`) first, each row
//! left to right. Every line ends with `\n`.
//!
//! `rc-snapshot v1`: a header `n=<n> p=<f64> seed=<u64>` followed by one
//! line `x1,y1 x2,y2 0|1` per bond, sorted by `(x1, y1, x2, y2)`.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! parsing and re-writing a snapshot reproduces it byte for byte.

use std::collections::HashMap;
use std::str::FromStr;

use crate::cluster::{BondConfig, BondLattice};
use crate::error::{Error, Result};
use crate::lattice::{Site, Spin, SpinConfig, SquareBox};

#[derive(Debug, Clone, PartialEq)]
pub struct IsingSnapshot {
    pub n: usize,
    pub beta: f64,
    pub h: f64,
    pub seed: u64,
    /// Interior spins in index order (row-major from `y = -n`).
    pub spins: Vec<Spin>,
}

impl IsingSnapshot {
    pub fn from_config(c: &SpinConfig, beta: f64, h: f64, seed: u64) -> Self {
        IsingSnapshot {
            n: c.geometry().half_width(),
            beta,
            h,
            seed,
            spins: c.interior(),
        }
    }

    /// Configuration with the stored interior and a uniform ring.
    pub fn to_config(&self, boundary: Spin) -> Result<SpinConfig> {
        SpinConfig::from_interior(SquareBox::new(self.n)?, &self.spins, boundary)
    }

    pub fn write(&self) -> String {
        let side = 2 * self.n + 1;
        let mut out = format!(
            "n={} beta={} h={} seed={}\n",
            self.n, self.beta, self.h, self.seed
        );
        out.reserve(side * (side + 1));
        for row in (0..side).rev() {
            for v in &self.spins[row * side..(row + 1) * side] {
                out.push(v.as_char());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.split_inclusive('\n');
        let header = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty snapshot".into(),
        })?;
        let fields = header_fields(header, 1, &["n", "beta", "h", "seed"])?;
        let n: usize = parse_field(&fields, "n", 1)?;
        let beta: f64 = parse_field(&fields, "beta", 1)?;
        let h: f64 = parse_field(&fields, "h", 1)?;
        let seed: u64 = parse_field(&fields, "seed", 1)?;
        let geom = SquareBox::new(n).map_err(|e| Error::Parse {
            line: 1,
            msg: e.to_string(),
        })?;
        let side = geom.side();
        let mut rows: Vec<Vec<Spin>> = Vec::with_capacity(side);
        for (i, raw) in lines.enumerate() {
            let line = i + 2;
            let body = raw.strip_suffix('\n').ok_or(Error::Parse {
                line,
                msg: "missing final newline".into(),
            })?;
            if rows.len() == side {
                return Err(Error::Parse {
                    line,
                    msg: "too many rows".into(),
                });
            }
            let row: Vec<Spin> = body
                .chars()
                .map(|ch| {
                    Spin::from_char(ch).ok_or(Error::Parse {
                        line,
                        msg: format!("unexpected character {ch:?}"),
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != side {
                return Err(Error::Parse {
                    line,
                    msg: format!("row has {} spins, expected {side}", row.len()),
                });
            }
            rows.push(row);
        }
        if rows.len() != side {
            return Err(Error::Parse {
                line: rows.len() + 2,
                msg: format!("expected {side} rows, found {}", rows.len()),
            });
        }
        let spins = rows.into_iter().rev().flatten().collect();
        Ok(IsingSnapshot {
            n,
            beta,
            h,
            seed,
            spins,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RcSnapshot {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    /// `(a, b, open)` with `a < b` in `(x, y)` order, sorted.
    pub bonds: Vec<(Site, Site, bool)>,
}

fn lex_key(a: Site, b: Site) -> (i32, i32, i32, i32) {
    (a.x, a.y, b.x, b.y)
}

impl RcSnapshot {
    pub fn from_bonds(b: &BondConfig, p: f64, seed: u64) -> Self {
        let lat = b.lattice();
        let mut bonds: Vec<(Site, Site, bool)> = lat
            .bonds()
            .iter()
            .enumerate()
            .map(|(i, bond)| {
                let (a, c) = if (bond.a.x, bond.a.y) <= (bond.b.x, bond.b.y) {
                    (bond.a, bond.b)
                } else {
                    (bond.b, bond.a)
                };
                (a, c, b.is_open(i))
            })
            .collect();
        bonds.sort_by_key(|&(a, c, _)| lex_key(a, c));
        RcSnapshot {
            n: lat.geometry().half_width(),
            p,
            seed,
            bonds,
        }
    }

    /// Rebuild the bond configuration on `lattice`, which must have exactly
    /// the stored bonds.
    pub fn to_bonds(&self, lattice: &std::sync::Arc<BondLattice>) -> Result<BondConfig> {
        if lattice.geometry().half_width() != self.n || lattice.bonds().len() != self.bonds.len() {
            return Err(Error::Dimension("snapshot does not fit the bond lattice".into()));
        }
        let mut lookup: HashMap<(i32, i32, i32, i32), bool> = HashMap::new();
        for &(a, b, o) in &self.bonds {
            lookup.insert(lex_key(a, b), o);
        }
        let mut out = BondConfig::all_closed(lattice.clone());
        for (i, bond) in lattice.bonds().iter().enumerate() {
            let open = lookup
                .get(&lex_key(bond.a, bond.b))
                .or_else(|| lookup.get(&lex_key(bond.b, bond.a)))
                .ok_or_else(|| Error::Dimension("bond missing from snapshot".into()))?;
            out.set(i, *open);
        }
        Ok(out)
    }

    pub fn write(&self) -> String {
        let mut out = format!("n={} p={} seed={}\n", self.n, self.p, self.seed);
        for &(a, b, o) in &self.bonds {
            out.push_str(&format!("{},{} {},{} {}\n", a.x, a.y, b.x, b.y, u8::from(o)));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.split_inclusive('\n');
        let header = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty snapshot".into(),
        })?;
        let fields = header_fields(header, 1, &["n", "p", "seed"])?;
        let n: usize = parse_field(&fields, "n", 1)?;
        let p: f64 = parse_field(&fields, "p", 1)?;
        let seed: u64 = parse_field(&fields, "seed", 1)?;
        let mut bonds = Vec::new();
        for (i, raw) in lines.enumerate() {
            let line = i + 2;
            let bad = |msg: &str| Error::Parse {
                line,
                msg: msg.to_string(),
            };
            let body = raw.strip_suffix('\n').ok_or_else(|| bad("missing final newline"))?;
            let parts: Vec<&str> = body.split(' ').collect();
            if parts.len() != 3 {
                return Err(bad("expected `x1,y1 x2,y2 0|1`"));
            }
            let site = |s: &str| -> Result<Site> {
                let (x, y) = s.split_once(',').ok_or_else(|| bad("site must be `x,y`"))?;
                Ok(Site::new(
                    x.parse().map_err(|_| bad("bad coordinate"))?,
                    y.parse().map_err(|_| bad("bad coordinate"))?,
                ))
            };
            let open = match parts[2] {
                "0" => false,
                "1" => true,
                _ => return Err(bad("bond state must be 0 or 1")),
            };
            bonds.push((site(parts[0])?, site(parts[1])?, open));
        }
        Ok(RcSnapshot { n, p, seed, bonds })
    }
}

fn header_fields<'a>(header: &'a str, line: usize, keys: &[&str]) -> Result<Vec<(&'a str, &'a str)>> {
    let body = header.strip_suffix('\n').ok_or(Error::Parse {
        line,
        msg: "missing final newline".into(),
    })?;
    let fields: Vec<(&str, &str)> = body
        .split(' ')
        .map(|f| {
            f.split_once('=').ok_or(Error::Parse {
                line,
                msg: format!("malformed header field {f:?}"),
            })
        })
        .collect::<Result<_>>()?;
    let names: Vec<&str> = fields.iter().map(|f| f.0).collect();
    if names != keys {
        return Err(Error::Parse {
            line,
            msg: format!("header must have fields {keys:?}, found {names:?}"),
        });
    }
    Ok(fields)
}

fn parse_field<T: FromStr>(fields: &[(&str, &str)], key: &str, line: usize) -> Result<T> {
    let raw = fields
        .iter()
        .find(|f| f.0 == key)
        .map(|f| f.1)
        .ok_or(Error::Parse {
            line,
            msg: format!("missing {key}"),
        })?;
    raw.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {key}={raw}"),
    })
}
