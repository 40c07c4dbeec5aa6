use crate::commands::{Payload, ResultRecord};
use crate::config::OutputFormat;

/// Flat table used for the CSV view.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn quantity_table(pairs: Vec<(String, String)>) -> Table {
    Table {
        header: vec!["quantity".into(), "value".into()],
        rows: pairs.into_iter().map(|(k, v)| vec![k, v]).collect(),
    }
}

impl Payload {
    /// The payload flattened to one table.
    pub fn table(&self) -> Table {
        match self {
            Payload::OtocCurve { rows, .. } => Table {
                header: vec!["t".into(), "g".into()],
                rows: rows.iter().map(|r| vec![num(r.t), num(r.g)]).collect(),
            },
            Payload::Estimates { report, bounds } => {
                let mut pairs = vec![
                    ("haar".to_string(), num(report.haar)),
                    ("nrc".into(), num(report.nrc)),
                    ("nrc_plus".into(), num(report.nrc_plus)),
                    ("exact".into(), num(report.exact)),
                    ("ordering_holds".into(), report.ordering.all().to_string()),
                    ("nrc_condition".into(), report.nrc_flags.nrc.to_string()),
                    ("nrc_plus_condition".into(), report.nrc_flags.nrc_plus.to_string()),
                ];
                for b in bounds {
                    let p = format!("bound_p{}", b.percentile);
                    pairs.push((format!("{p}_epsilon"), num(b.bound.epsilon)));
                    pairs.push((format!("{p}_alpha"), num(b.bound.alpha)));
                    pairs.push((format!("{p}_bound"), num(b.bound.bound)));
                    pairs.push((format!("{p}_deviation"), opt(b.bound.deviation)));
                }
                quantity_table(pairs)
            }
            Payload::Sample {
                time,
                stats,
                exhaustive,
                concentration,
                ..
            } => {
                let mut pairs = vec![
                    ("time".to_string(), num(*time)),
                    ("n_samples".into(), stats.n_samples.to_string()),
                    ("mean".into(), num(stats.mean)),
                    ("variance".into(), num(stats.variance)),
                    ("reference".into(), num(stats.reference)),
                    ("exhaustive".into(), opt(*exhaustive)),
                ];
                if let Some(c) = concentration {
                    for r in &c.rows {
                        pairs.push((format!("p_exceed_eps{}", r.epsilon), num(r.empirical_p)));
                        pairs.push((format!("bound_eps{}", r.epsilon), num(r.bound)));
                    }
                }
                quantity_table(pairs)
            }
            Payload::Entropy {
                time,
                stats,
                scaled_mean,
                g_exact,
                concentration,
                ..
            } => {
                let mut pairs = vec![
                    ("time".to_string(), num(*time)),
                    ("n_samples".into(), stats.n_samples.to_string()),
                    ("mean".into(), num(stats.mean)),
                    ("variance".into(), num(stats.variance)),
                    ("reference".into(), num(stats.reference)),
                    ("scaled_mean".into(), num(*scaled_mean)),
                    ("g_exact".into(), num(*g_exact)),
                ];
                for r in concentration.iter().flat_map(|c| &c.rows) {
                    pairs.push((format!("p_exceed_eps{}", r.epsilon), num(r.empirical_p)));
                    pairs.push((format!("bound_eps{}", r.epsilon), num(r.bound)));
                }
                quantity_table(pairs)
            }
            Payload::Channel { rows, .. } => Table {
                header: ["t", "g", "diamond_lower", "diamond_upper", "choi_witness", "cptp"]
                    .map(String::from)
                    .to_vec(),
                rows: rows
                    .iter()
                    .map(|r| {
                        vec![
                            num(r.t),
                            num(r.g),
                            num(r.diamond_lower),
                            num(r.diamond_upper),
                            num(r.choi_witness),
                            r.cptp.to_string(),
                        ]
                    })
                    .collect(),
            },
            Payload::Figure1 { rows, .. } => Table {
                header: ["model", "n", "estimator", "value"].map(String::from).to_vec(),
                rows: rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.model.clone(),
                            r.n.map(|n| n.to_string()).unwrap_or_default(),
                            r.estimator.clone(),
                            num(r.value),
                        ]
                    })
                    .collect(),
            },
        }
    }
}

/// Canonical JSON of the payload alone; equal configs give equal bytes.
pub fn payload_json(payload: &Payload) -> anyhow::Result<String> {
    Ok(serde_json::to_string(payload)?)
}

pub fn to_csv(payload: &Payload) -> anyhow::Result<String> {
    let table = payload.table();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn render(record: &ResultRecord, format: OutputFormat) -> anyhow::Result<String> {
    match format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(record)? + "\n"),
        OutputFormat::Csv => to_csv(&record.payload),
    }
}
