//! Browser bindings for the interactive demo page. Three operations are
//! exposed, each taking and returning JSON strings: full module/refinement
//! analysis, live deformation-residual checking, and the
//! maximal-monodromy transform.

use linvariant::deform::check_deformation;
use linvariant::io::{parse_module_file, FamilyFile, ModuleFile};
use linvariant::refine::{l_invariant_report, Refinement};
use linvariant::report;
use linvariant::triparam::max_monodromy_refinement;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const PRESETS: &[(&str, &str)] = &[
    (
        "rank2_semistable",
        include_str!("../../../fixtures/rank2_semistable.json"),
    ),
    (
        "rank3_split",
        include_str!("../../../fixtures/rank3_split.json"),
    ),
    (
        "rank3_chain",
        include_str!("../../../fixtures/rank3_chain.json"),
    ),
    (
        "rank3_wide_pair",
        include_str!("../../../fixtures/rank3_wide_pair.json"),
    ),
];

fn err(e: impl ToString) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Names of the bundled example files, as a JSON array.
#[wasm_bindgen]
pub fn fixture_names() -> String {
    let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
    serde_json::to_string(&names).unwrap()
}

/// The JSON text of one bundled example file.
#[wasm_bindgen]
pub fn fixture_json(name: &str) -> Result<String, JsValue> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| text.to_string())
        .ok_or_else(|| err(format!("unknown fixture {:?}", name)))
}

#[derive(Serialize)]
struct AnalyzeBundle {
    check: report::CheckOutput,
    #[serde(skip_serializing_if = "Option::is_none")]
    analysis: Option<report::AnalyzeOutput>,
    refinement_names: Vec<String>,
    family_names: Vec<String>,
}

fn load(file_json: &str) -> Result<ModuleFile, JsValue> {
    parse_module_file(file_json).map_err(err)
}

/// Validation, Hodge/Newton data, admissibility, and (when `refinement`
/// names a flag from the file) the full refinement analysis.
#[wasm_bindgen]
pub fn analyze(file_json: &str, refinement: &str) -> Result<String, JsValue> {
    let file = load(file_json)?;
    let module = file.to_module().map_err(err)?;
    let candidates = file.candidate_subspaces().map_err(err)?;
    let check = report::check_output(&module, &candidates);

    let analysis = if refinement.is_empty() {
        None
    } else {
        let flag = file.flag(refinement).map_err(err)?;
        let r = Refinement::new(module, flag).map_err(err)?;
        let rep = l_invariant_report(&r);
        Some(report::analyze_output(refinement, &r, &rep))
    };

    let bundle = AnalyzeBundle {
        check,
        analysis,
        refinement_names: file.refinements.iter().map(|r| r.name.clone()).collect(),
        family_names: file.families.keys().cloned().collect(),
    };
    Ok(report::to_json(&bundle))
}

/// Residual table of a family (given as the `{"characters": [...]}`
/// fragment) against the refinement's constraints.
#[wasm_bindgen]
pub fn deform_check(
    file_json: &str,
    refinement: &str,
    family_json: &str,
) -> Result<String, JsValue> {
    let file = load(file_json)?;
    let module = file.to_module().map_err(err)?;
    let flag = file.flag(refinement).map_err(err)?;
    let r = Refinement::new(module, flag).map_err(err)?;
    let fam_file: FamilyFile = serde_json::from_str(family_json).map_err(err)?;
    let family = linvariant::deform::FirstOrderFamily {
        characters: fam_file
            .characters
            .iter()
            .map(|c| linvariant::deform::FirstOrderCharacter {
                eps_p: c.eps_p.clone(),
                eps_w: c.eps_w.clone(),
                base_delta_p: c.base_delta_p.clone(),
                base_weight: c.base_weight.clone(),
            })
            .collect(),
    };
    let rep = l_invariant_report(&r);
    let out = check_deformation(&r, &rep, &family).map_err(err)?;
    Ok(report::to_json(&report::deform_output(&out)))
}

/// Canonical flag, triangular transform and the invariant cross-check for
/// a maximal-monodromy module.
#[wasm_bindgen]
pub fn max_monodromy(file_json: &str) -> Result<String, JsValue> {
    let file = load(file_json)?;
    let module = file.to_module().map_err(err)?;
    let out = max_monodromy_refinement(&module).map_err(err)?;
    Ok(report::to_json(&report::max_monodromy_output(&out)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analyze_bundle_contains_invariants() {
        let json = fixture_json("rank3_chain").unwrap();
        let out = analyze(&json, "F").unwrap();
        assert!(out.contains("strongly-critical"));
        assert!(out.contains("\"l\": \"7\""));
        assert!(out.contains("\"l\": \"-2\""));
    }

    #[test]
    fn deform_check_reports_residuals() {
        let json = fixture_json("rank3_chain").unwrap();
        let ok = r#"{"characters":[{"eps_p":"0","eps_w":"0"},{"eps_p":"-7","eps_w":"1"},{"eps_p":"-5","eps_w":"2"}]}"#;
        let out = deform_check(&json, "F", ok).unwrap();
        assert!(out.contains("\"pass\": true"));
    }

    #[test]
    fn max_monodromy_reports_transform() {
        let json = fixture_json("rank3_chain").unwrap();
        let out = max_monodromy(&json).unwrap();
        assert!(out.contains("\"l_values\""));
        assert!(out.contains("\"7\""));
    }
}
