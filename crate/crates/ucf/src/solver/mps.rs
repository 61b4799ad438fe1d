//! Free-format MPS output.

use crate::builder::{Formulation, Sense};
use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MpsCounts {
    pub rows: usize,
    pub cols: usize,
    pub nonzeros: usize,
}

/// Row names made unique by suffixing the row index on collision.
pub fn row_names(f: &Formulation) -> Vec<String> {
    let mut seen = HashSet::new();
    f.rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if seen.insert(r.name.clone()) {
                r.name.clone()
            } else {
                let n = format!("{}__{i}", r.name);
                seen.insert(n.clone());
                n
            }
        })
        .collect()
}

pub fn mps_string(f: &Formulation) -> (String, MpsCounts) {
    let mut s = String::new();
    let names = row_names(f);
    let vname: Vec<String> = (0..f.num_vars()).map(|j| f.var_name(j)).collect();
    writeln!(s, "NAME {}", f.kind).unwrap();
    s.push_str("ROWS\n N obj\n");
    for (r, name) in f.rows.iter().zip(&names) {
        let tag = match r.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        writeln!(s, " {tag} {name}").unwrap();
    }
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); f.num_vars()];
    for (i, r) in f.rows.iter().enumerate() {
        for (&j, &c) in r.expr.terms() {
            cols[j].push((i, c));
        }
    }
    let mut nonzeros = 0;
    if f.num_vars() > 0 {
        s.push_str("COLUMNS\n");
    }
    let mut in_int = false;
    let mut marker = 0;
    for j in 0..f.num_vars() {
        let binary = f.variables[j].binary;
        if binary != in_int {
            let kind = if binary { "INTORG" } else { "INTEND" };
            writeln!(s, " M{marker} 'MARKER' '{kind}'").unwrap();
            marker += 1;
            in_int = binary;
        }
        let c = f.objective.coef(&j);
        if c != 0.0 {
            writeln!(s, " {} obj {c}", vname[j]).unwrap();
        }
        if c == 0.0 && cols[j].is_empty() {
            writeln!(s, " {} obj 0", vname[j]).unwrap();
        }
        for &(i, a) in &cols[j] {
            writeln!(s, " {} {} {a}", vname[j], names[i]).unwrap();
            nonzeros += 1;
        }
    }
    if in_int {
        writeln!(s, " M{marker} 'MARKER' 'INTEND'").unwrap();
    }
    let rhs: Vec<_> = f.rows.iter().zip(&names).filter(|(r, _)| r.rhs != 0.0).collect();
    let obj_const = *f.objective.constant();
    if !rhs.is_empty() || obj_const != 0.0 {
        s.push_str("RHS\n");
        if obj_const != 0.0 {
            writeln!(s, " rhs obj {}", -obj_const).unwrap();
        }
        for (r, name) in rhs {
            writeln!(s, " rhs {name} {}", r.rhs).unwrap();
        }
    }
    if f.num_vars() > 0 {
        s.push_str("BOUNDS\n");
        for (v, name) in f.variables.iter().zip(&vname) {
            if v.lower == v.upper {
                writeln!(s, " FX bnd {name} {}", v.lower).unwrap();
                continue;
            }
            if v.lower != 0.0 {
                if v.lower.is_finite() {
                    writeln!(s, " LO bnd {name} {}", v.lower).unwrap();
                } else {
                    writeln!(s, " MI bnd {name}").unwrap();
                }
            }
            if v.upper.is_finite() {
                writeln!(s, " UP bnd {name} {}", v.upper).unwrap();
            }
        }
    }
    if !f.quad.is_empty() {
        s.push_str("QUADOBJ\n");
        for q in &f.quad {
            let c = if q.i == q.j { 2.0 * q.coef } else { q.coef };
            writeln!(s, " {} {} {c}", vname[q.i], vname[q.j]).unwrap();
        }
    }
    s.push_str("ENDATA\n");
    (s, MpsCounts { rows: f.rows.len(), cols: f.num_vars(), nonzeros })
}

pub fn write_mps(f: &Formulation, path: impl AsRef<Path>) -> std::io::Result<MpsCounts> {
    let (s, counts) = mps_string(f);
    std::fs::write(path, s)?;
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{build_formulation, BuildOptions, ModelKind};
    use crate::instance::UcInstance;

    #[test]
    fn empty_formulation_skeleton() {
        let f = Formulation::new(ModelKind::TwoP, 1);
        let (s, c) = mps_string(&f);
        assert_eq!(s, "NAME 2p\nROWS\n N obj\nENDATA\n");
        assert_eq!(c, MpsCounts { rows: 0, cols: 0, nonzeros: 0 });
    }

    #[test]
    fn counts_match_stats_and_output_is_stable() {
        let json = r#"{"T":4,"demand":[150,200,250,150],"reserve":[15,20,25,15],"units":[{"id":"g","p_min":100,"p_max":400,
            "p_start":160,"p_shut":190,"p_up":120,"p_down":90,"t_on":1,"t_off":1,"t_cold":1,"alpha":10,"beta":2,
            "gamma":0.01,"c_hot":50,"c_cold":100,"u0":0,"t0":-2}]}"#;
        let inst = UcInstance::from_json_str(json).unwrap();
        let f = build_formulation(&inst, ModelKind::Mp1, &[3], BuildOptions::default()).unwrap();
        let (a, c) = mps_string(&f);
        let st = f.stats();
        assert_eq!((c.rows, c.cols, c.nonzeros), (st.rows, st.vars, st.nonzeros));
        let g = build_formulation(&inst, ModelKind::Mp1, &[3], BuildOptions::default()).unwrap();
        assert_eq!(a, mps_string(&g).0);
        assert!(a.contains("'INTORG'") && a.contains("QUADOBJ"));
    }
}
