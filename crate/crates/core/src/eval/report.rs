use super::SystemReport;
use crate::io::csv_field;
use crate::ruleng::ConceptCategory;

/// Two decimals, halves rounded up.
pub fn format_metric(x: f64) -> String {
    format!("{:.2}", (x * 100.0 + 0.5).floor() / 100.0)
}

fn concept_columns(reports: &[SystemReport]) -> Vec<ConceptCategory> {
    match reports.first() {
        Some(r) => r.concepts.iter().map(|c| c.concept).collect(),
        None => ConceptCategory::BINARY.to_vec(),
    }
}

/// Text table: one row per system, one column per concept, each cell holding
/// sensitivity, specificity, PPV and F1 (positive class). Undefined values
/// print as `-`.
pub fn render_report(reports: &[SystemReport]) -> String {
    let concepts = concept_columns(reports);
    let cell_w = "0.00 0.00 0.00 0.00".len().max(
        concepts.iter().map(|c| c.title().len()).max().unwrap_or(0),
    );
    let sys_w = reports
        .iter()
        .map(|r| r.system.len())
        .max()
        .unwrap_or(0)
        .max("System".len());

    let mut out = String::new();
    let mut row = |first: &str, cells: Vec<String>| {
        out.push_str(&format!("{first:<sys_w$}"));
        for c in cells {
            out.push_str(&format!(" | {c:<cell_w$}"));
        }
        out.push('\n');
    };
    row("System", concepts.iter().map(|c| c.title().to_string()).collect());
    row("", concepts.iter().map(|_| "Sens Spec PPV  F1".to_string()).collect());
    for r in reports {
        let cells = concepts
            .iter()
            .map(|&c| match r.concept(c) {
                Some(cr) => {
                    let m = &cr.metrics;
                    let f = |name: &str, v: f64| {
                        if m.is_undefined(name) {
                            format!("{:<4}", "-")
                        } else {
                            format_metric(v)
                        }
                    };
                    format!(
                        "{} {} {} {}",
                        f("sensitivity", m.sensitivity),
                        f("specificity", m.specificity),
                        f("ppv", m.ppv),
                        f("f1_positive", m.f1_positive)
                    )
                }
                None => String::new(),
            })
            .collect();
        row(&r.system, cells);
    }
    out
}

/// Machine-readable form of the same numbers, six decimals.
pub fn render_csv(reports: &[SystemReport]) -> String {
    let mut out =
        String::from("system,concept,sensitivity,specificity,ppv,f1_positive,f1_weighted,flags\n");
    for r in reports {
        for c in &r.concepts {
            let m = &c.metrics;
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
                csv_field(&r.system),
                c.concept.key(),
                m.sensitivity,
                m.specificity,
                m.ppv,
                m.f1_positive,
                m.f1_weighted,
                m.undefined.join(";")
            ));
        }
    }
    out
}
