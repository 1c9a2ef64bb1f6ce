//! SNR gap between two BLER curves at a target error rate.

use std::path::Path;

use crate::error::{io_err, Error, Result};
use crate::sim::harness::CSV_HEADER;

/// `(snr_db, bler)` pairs sorted by SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct BlerCurve {
    pub points: Vec<(f64, f64)>,
}

impl BlerCurve {
    pub fn new(mut points: Vec<(f64, f64)>) -> Self {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { points }
    }

    pub fn parse_csv(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => return Err(parse_err(1, format!("expected header `{CSV_HEADER}`"))),
        }
        let mut points = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(parse_err(idx + 1, format!("expected 5 fields, found {}", fields.len())));
            }
            let num = |i: usize| {
                fields[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(idx + 1, format!("bad number `{}`", fields[i])))
            };
            points.push((num(0)?, num(3)?));
        }
        Ok(Self::new(points))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse_csv(&text, path)
    }

    /// SNR at which the curve crosses `target`, interpolating `log10(bler)`
    /// linearly in SNR between neighbouring points. Points with zero BLER
    /// carry no information on a log scale and are skipped.
    pub fn snr_at(&self, target: f64) -> Option<f64> {
        if !(target > 0.0) {
            return None;
        }
        let usable: Vec<(f64, f64)> = self.points.iter().copied().filter(|p| p.1 > 0.0).collect();
        let t = target.log10();
        for w in usable.windows(2) {
            let ((s0, b0), (s1, b1)) = (w[0], w[1]);
            let (l0, l1) = (b0.log10(), b1.log10());
            if t > l0.max(l1) || t < l0.min(l1) {
                continue;
            }
            if l0 == l1 {
                return Some(s0);
            }
            return Some(s0 + (t - l0) / (l1 - l0) * (s1 - s0));
        }
        match usable.as_slice() {
            [(s, b)] if *b == target => Some(*s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub target_bler: f64,
    pub snr_a: f64,
    pub snr_b: f64,
    /// `snr_a - snr_b`: positive when curve A needs more SNR.
    pub gap_db: f64,
}

pub fn compare_curves(a: &BlerCurve, b: &BlerCurve, target_bler: f64) -> Result<GapReport> {
    let find = |c: &BlerCurve, which: &str| {
        c.snr_at(target_bler).ok_or_else(|| Error::NoOverlap {
            target: target_bler,
            which: which.to_string(),
        })
    };
    let snr_a = find(a, "curve A")?;
    let snr_b = find(b, "curve B")?;
    Ok(GapReport {
        target_bler,
        snr_a,
        snr_b,
        gap_db: snr_a - snr_b,
    })
}

/// Reads two sweep CSV files and compares them.
pub fn compare_runs(csv_a: &Path, csv_b: &Path, target_bler: f64) -> Result<GapReport> {
    compare_curves(&BlerCurve::read_csv(csv_a)?, &BlerCurve::read_csv(csv_b)?, target_bler)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn waterfall(shift: f64) -> BlerCurve {
        // log10(bler) = -(snr - shift), so 1e-3 sits exactly at snr = 3 + shift.
        BlerCurve::new((0..6).map(|i| (i as f64 + shift, 10f64.powf(-(i as f64)))).collect())
    }

    #[test]
    fn identical_curves_have_no_gap() {
        let r = compare_curves(&waterfall(0.0), &waterfall(0.0), 1e-3).unwrap();
        assert_eq!(r.gap_db, 0.0);
    }

    #[test]
    fn shifted_curve() {
        let r = compare_curves(&waterfall(0.1), &waterfall(0.0), 1e-3).unwrap();
        assert!((r.gap_db - 0.1).abs() < 1e-9);
        let r = compare_curves(&waterfall(0.0), &waterfall(0.1), 3e-3).unwrap();
        assert!((r.gap_db + 0.1).abs() < 1e-9);
    }

    #[test]
    fn target_outside_range() {
        let err = compare_curves(&waterfall(0.0), &waterfall(0.0), 1e-9).unwrap_err();
        assert!(matches!(err, Error::NoOverlap { .. }));
        assert!(waterfall(0.0).snr_at(0.0).is_none());
    }

    #[test]
    fn zero_points_are_skipped() {
        let c = BlerCurve::new(vec![(0.0, 0.1), (1.0, 0.01), (2.0, 0.0)]);
        assert!((c.snr_at(0.01).unwrap() - 1.0).abs() < 1e-12);
        assert!(c.snr_at(1e-3).is_none());
    }

    #[test]
    fn csv_parsing() {
        let text = format!("{CSV_HEADER}\n1,100,10,0.1,7\n2,1000,10,0.01,7\n");
        let c = BlerCurve::parse_csv(&text, Path::new("x.csv")).unwrap();
        assert_eq!(c.points, vec![(1.0, 0.1), (2.0, 0.01)]);
        assert!(BlerCurve::parse_csv("a,b\n", Path::new("x.csv")).is_err());
        assert!(BlerCurve::parse_csv(&format!("{CSV_HEADER}\n1,2\n"), Path::new("x.csv")).is_err());
    }
}
