//! Plain-text formats for coefficient, coin and measure files.
//!
//! Every format is line oriented: blank lines and anything after `#` are
//! ignored, and each remaining line holds whitespace-separated fields.
//!
//! | kind        | fields                                   |
//! |-------------|------------------------------------------|
//! | Verblunsky  | `n re(alpha) im(alpha)`                  |
//! | coins       | `n re(c11) im(c11) re(c12) im(c12) re(c21) im(c21) re(c22) im(c22)` |
//! | measure     | `re(z) im(z) weight`                     |
//!
//! Indices must be distinct.  Writers print floats in shortest round-trip
//! form, so `parse(format(x)) == x`.

use std::collections::BTreeSet;
use std::fmt::Write;

use num_complex::Complex64;

use crate::cmv::{DiscreteMeasure, VerblunskySequence};
use crate::error::{Error, Result};
use crate::fibonacci::KOfZ;
use crate::qwalk::{Coin, CoinSequence};

/// Non-empty data lines with their 1-based line numbers, split into fields.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn expect_fields(line: usize, fields: &[&str], count: usize) -> Result<()> {
    if fields.len() != count {
        return Err(parse_error(
            line,
            format!("expected {count} fields, found {}", fields.len()),
        ));
    }
    Ok(())
}

fn index(line: usize, field: &str) -> Result<i64> {
    field
        .parse()
        .map_err(|_| parse_error(line, format!("`{field}` is not an integer index")))
}

fn real(line: usize, field: &str) -> Result<f64> {
    let x: f64 = field
        .parse()
        .map_err(|_| parse_error(line, format!("`{field}` is not a number")))?;
    if !x.is_finite() {
        return Err(parse_error(line, format!("`{field}` is not finite")));
    }
    Ok(x)
}

fn complex(line: usize, re: &str, im: &str) -> Result<Complex64> {
    Ok(Complex64::new(real(line, re)?, real(line, im)?))
}

fn claim(seen: &mut BTreeSet<i64>, line: usize, n: i64) -> Result<()> {
    if !seen.insert(n) {
        return Err(parse_error(line, format!("index {n} appears twice")));
    }
    Ok(())
}

/// Recast a domain error from a constructor as a parse error on `line`.
fn at_line<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| parse_error(line, e.to_string()))
}

pub fn parse_verblunsky(text: &str, half_line: bool) -> Result<VerblunskySequence> {
    let mut seq = VerblunskySequence::new(half_line);
    let mut seen = BTreeSet::new();
    for (line, f) in records(text) {
        expect_fields(line, &f, 3)?;
        let n = index(line, f[0])?;
        claim(&mut seen, line, n)?;
        at_line(line, seq.insert(n, complex(line, f[1], f[2])?))?;
    }
    Ok(seq)
}

pub fn parse_coins(text: &str) -> Result<CoinSequence> {
    let mut seq = CoinSequence::new();
    let mut seen = BTreeSet::new();
    for (line, f) in records(text) {
        expect_fields(line, &f, 9)?;
        let n = index(line, f[0])?;
        claim(&mut seen, line, n)?;
        let c = |k: usize| complex(line, f[2 * k + 1], f[2 * k + 2]);
        let coin = at_line(line, Coin::new(c(0)?, c(1)?, c(2)?, c(3)?))?;
        at_line(line, seq.insert(n, coin))?;
    }
    Ok(seq)
}

pub fn parse_measure(text: &str) -> Result<DiscreteMeasure> {
    let mut atoms = Vec::new();
    for (line, f) in records(text) {
        expect_fields(line, &f, 3)?;
        let z = complex(line, f[0], f[1])?;
        let w = real(line, f[2])?;
        // validate atom by atom so the error names the offending line
        at_line(line, DiscreteMeasure::new(vec![(z, w)]))?;
        atoms.push((z, w));
    }
    if atoms.is_empty() {
        return Err(parse_error(0, "measure file has no atoms"));
    }
    DiscreteMeasure::new(atoms)
}

/// `K(z)` table: one `arg(z) K` line per node, see [`KOfZ::interpolated`].
pub fn parse_k_table(text: &str) -> Result<KOfZ> {
    let mut nodes = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, f) in records(text) {
        expect_fields(line, &f, 2)?;
        let t = real(line, f[0])?;
        let k = real(line, f[1])?;
        if !(k > 1.0) {
            return Err(parse_error(line, format!("K = {k} must exceed 1")));
        }
        if !seen.insert((t.rem_euclid(std::f64::consts::TAU) + 0.0).to_bits()) {
            return Err(parse_error(line, format!("angle {t} repeats an earlier node")));
        }
        nodes.push((t, k));
    }
    if nodes.is_empty() {
        return Err(parse_error(0, "K table has no nodes"));
    }
    KOfZ::interpolated(nodes)
}

pub fn format_verblunsky(seq: &VerblunskySequence) -> String {
    let mut out = String::new();
    for (n, a) in seq.iter() {
        let _ = writeln!(out, "{n} {} {}", a.re, a.im);
    }
    out
}

pub fn format_coins(seq: &CoinSequence) -> String {
    let mut out = String::new();
    for (n, c) in seq.iter() {
        let _ = write!(out, "{n}");
        for x in [c.c11, c.c12, c.c21, c.c22] {
            let _ = write!(out, " {} {}", x.re, x.im);
        }
        out.push('\n');
    }
    out
}

pub fn format_measure(mu: &DiscreteMeasure) -> String {
    let mut out = String::new();
    for (z, w) in mu.atoms() {
        let _ = writeln!(out, "{} {} {w}", z.re, z.im);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verblunsky_with_comments() {
        let text = "# header\n0 0.5 0\n\n1 0 -0.25   # trailing\n";
        let seq = parse_verblunsky(text, true).unwrap();
        assert_eq!(seq.alpha(1).unwrap(), Complex64::new(0.0, -0.25));
        assert_eq!(seq.len(), 2);
    }

    #[test]
    fn verblunsky_errors_carry_lines() {
        let cases = [
            ("0 0.5 0\n1 1.0 0\n", 2),
            ("0 0.5\n", 1),
            ("\n\nx 0 0\n", 3),
            ("0 0 0\n0 0.1 0\n", 2),
            ("0 nan 0\n", 1),
            ("-1 0 0\n", 1),
        ];
        for (text, want) in cases {
            match parse_verblunsky(text, true) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(parse_verblunsky("-1 0 0\n", false).is_ok());
    }

    #[test]
    fn coins_roundtrip() {
        let mut seq = CoinSequence::rotation(-3..4, 0.7);
        seq.insert(10, Coin::hadamard()).unwrap();
        let back = parse_coins(&format_coins(&seq)).unwrap();
        assert_eq!(back, seq);
        assert!(matches!(
            parse_coins("0 1 0 0 0 0 0 2 0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn measure_roundtrip() {
        let mu = DiscreteMeasure::uniform(7);
        assert_eq!(parse_measure(&format_measure(&mu)).unwrap(), mu);
        assert!(matches!(parse_measure("# nothing\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_measure("1 0 1\n2 0 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_measure("1 0 -1\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn k_table_interpolates_around_the_circle() {
        use std::f64::consts::PI;
        let k = parse_k_table("# arg K\n0 2\n3.141592653589793 4   # half turn\n").unwrap();
        assert_eq!(k.at(Complex64::new(1.0, 0.0)), 2.0);
        assert!((k.at(Complex64::from_polar(1.0, PI / 2.0)) - 3.0).abs() < 1e-12);
        assert!((k.at(Complex64::from_polar(1.0, -PI / 2.0)) - 3.0).abs() < 1e-12);
        assert_eq!(parse_k_table("1.5 7\n").unwrap().at(Complex64::new(0.0, 1.0)), 7.0);

        assert!(matches!(parse_k_table("0 2\n1 0.5\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_k_table("0 2\n-0 3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_k_table("0 2 3\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_k_table("# empty\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn verblunsky_roundtrip() {
        let seq = VerblunskySequence::from_fn(false, -5..5, |n| {
            Complex64::from_polar(0.1 * (n + 5) as f64 / 1.3, n as f64)
        })
        .unwrap();
        assert_eq!(parse_verblunsky(&format_verblunsky(&seq), false).unwrap(), seq);
    }
}
