//! Facet reports for one unit and window of an instance.

use crate::bounds::RampParams;
use crate::instance::{normalize_unit, status_bounds, UcInstance};
use crate::polylab::polytope::{exact_params, history_of};
use crate::polylab::{build_polytope, report_json_lines, FacetLab, PolylabError, PolytopeKind, RowFamily};
use crate::windows::{interval_set, HistoryMode};

#[derive(Debug, Clone, Copy)]
pub struct VerifyRequest {
    pub unit: usize,
    pub m: i64,
    pub size: i64,
    pub kind: PolytopeKind,
}

/// JSON lines with one facet report per bound and ramp row of the window polytope.
pub fn verify_unit_window(inst: &UcInstance, req: &VerifyRequest) -> Result<String, PolylabError> {
    let u = inst
        .units
        .get(req.unit)
        .ok_or_else(|| PolylabError::Guard(format!("unit index {} out of range", req.unit)))?;
    let nu = normalize_unit(u).map_err(|e| PolylabError::Guard(e.to_string()))?;
    let sb = status_bounds(&nu, inst.t());
    let unit = exact_params(&RampParams::from_unit(&nu, &sb));
    let history = if req.kind.is_tilde() { history_of(&unit, sb.l_lock) } else { HistoryMode::None };
    let a = interval_set(req.m, req.size, unit.t_on, unit.t_off, history);
    let p = build_polytope(req.kind, &a, &unit)?;
    let lab = FacetLab::new(&p)?;
    let reports = p
        .rows
        .iter()
        .enumerate()
        .filter(|(_, r)| !matches!(r.tag.family, RowFamily::Packing | RowFamily::OnlineHistory))
        .map(|(i, _)| lab.report_row(i).map(|rep| (i, rep)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(report_json_lines(&p, &reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::synthetic::generate_synthetic;

    #[test]
    fn emits_one_line_per_bound_row() {
        let inst = generate_synthetic(2, 1, 6);
        let req = VerifyRequest { unit: 0, m: 1, size: 3, kind: PolytopeKind::Q };
        let text = verify_unit_window(&inst, &req).unwrap();
        assert_eq!(text.lines().count(), 3 + 6);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["valid"], true);
        }
    }
}
