//! Table rendering for the CLI: fixed numeric format, LF endings, no
//! locale surprises, so identical runs emit identical bytes.

use crate::error::{input, Result};
use crate::exceptional::AvoidResult;
use std::io::Write;
use std::path::Path;

/// Plain decimal with 9 significant digits. Magnitude picks the number of
/// places, so small values keep their leading zeros readable.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.000000000".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (8 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn render(&self) -> Result<String> {
        if self.rows.is_empty() {
            return input("refusing to render an empty table");
        }
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            if row.len() != self.header.len() {
                return input(format!(
                    "row has {} fields, header has {}",
                    row.len(),
                    self.header.len()
                ));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.render()?.as_bytes())?;
        Ok(())
    }
}

/// Avoidance series schema. Lyapunov columns expand with the dimension.
pub fn avoid_table(d: usize, rows: &[AvoidResult]) -> Table {
    let mut header: Vec<String> = vec!["depth".into(), "n_states".into(), "h_top".into()];
    for i in 1..=d {
        header.push(format!("lyap_{i}"));
    }
    header.extend(
        ["s_star", "alpha0", "eps_n", "thmA_bound", "thmB_bound"].map(String::from),
    );
    let rows = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.depth.to_string(), r.n_states.to_string(), sig9(r.h_top)];
            row.extend(r.lyapunov.iter().map(|&v| sig9(v)));
            row.extend([
                sig9(r.s_star),
                sig9(r.alpha0),
                sig9(r.eps_n),
                sig9(r.thm_a_bound),
                sig9(r.thm_b_bound),
            ]);
            row
        })
        .collect();
    Table { header, rows }
}

/// Pressure grid schema: s against both potential families.
pub fn pressure_grid_table(points: &[(f64, f64, f64)]) -> Table {
    Table {
        header: ["s", "pressure_sub", "pressure_super"].map(String::from).to_vec(),
        rows: points
            .iter()
            .map(|&(s, p_sub, p_sup)| vec![sig9(s), sig9(p_sub), sig9(p_sup)])
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits_across_magnitudes() {
        assert_eq!(sig9(2.0), "2.00000000");
        assert_eq!(sig9(0.6942419136306174), "0.694241914");
        assert_eq!(sig9(-0.024616862891797764), "-0.0246168629");
        assert_eq!(sig9(987.0), "987.000000");
        assert_eq!(sig9(0.0), "0.000000000");
    }

    #[test]
    fn tables_reject_empty_and_ragged_data() {
        let empty = Table { header: vec!["a".into()], rows: vec![] };
        assert!(empty.render().is_err());
        let ragged = Table {
            header: vec!["a".into(), "b".into()],
            rows: vec![vec!["1".into()]],
        };
        assert!(ragged.render().is_err());
        let ok = Table {
            header: vec!["a".into(), "b".into()],
            rows: vec![vec!["1".into(), "2".into()]],
        };
        assert_eq!(ok.render().unwrap(), "a,b\n1,2\n");
    }
}
