//! The records table: one CSV row per iteration.
//!
//! Columns, in order: `iteration`, `optimized`, `score`, one column per
//! reported objective (`O_PD`, `O_C`, ...), `unmitigated_duration`, one
//! `x:<variable>` column per decision variable, `applied_reductions` and
//! `critical_path`. Lists are `;`-separated. Empty cells mean "absent".
//! Floats use the shortest text that parses back to the same value.

use std::io::{Read, Write};
use std::str::FromStr;

use odycon_core::objectives::{Objective, ObjectiveVector};
use odycon_core::optimizer::DecisionVector;
use odycon_core::SimulationRecord;

use crate::CliError;

pub const DECISION_PREFIX: &str = "x:";

/// Records plus the column metadata needed to interpret them.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordTable {
    pub objectives: Vec<Objective>,
    pub variables: Vec<String>,
    pub records: Vec<SimulationRecord>,
}

fn float(v: f64) -> String {
    format!("{v}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

impl RecordTable {
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["iteration", "optimized", "score"].map(String::from).to_vec();
        h.extend(self.objectives.iter().map(|o| o.column().to_string()));
        h.push("unmitigated_duration".into());
        h.extend(self.variables.iter().map(|v| format!("{DECISION_PREFIX}{v}")));
        h.push("applied_reductions".into());
        h.push("critical_path".into());
        h
    }

    pub fn write<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header()).map_err(runtime)?;
        for r in &self.records {
            let mut row = vec![r.iteration.to_string(), r.optimized.to_string(), opt_float(r.score)];
            row.extend(self.objectives.iter().map(|o| opt_float(r.objectives.get(*o))));
            row.push(opt_float(r.unmitigated_duration));
            row.extend(r.decision.0.iter().map(u32::to_string));
            row.push(join(&r.applied_reductions));
            row.push(join(&r.critical_path));
            w.write_record(&row).map_err(runtime)?;
        }
        w.flush().map_err(|e| CliError::Runtime(e.to_string()))
    }

    pub fn read<R: Read>(input: R) -> Result<Self, CliError> {
        let mut rd = csv::Reader::from_reader(input);
        let header: Vec<String> = rd.headers().map_err(malformed)?.iter().map(String::from).collect();
        let col = |name: &str| header.iter().position(|h| h == name);
        let need = |name: &str| col(name).ok_or_else(|| bad(format!("missing column `{name}`")));
        let (i_iter, i_opt, i_score) = (need("iteration")?, need("optimized")?, need("score")?);
        let i_unmit = need("unmitigated_duration")?;
        let i_applied = need("applied_reductions")?;
        let i_cp = need("critical_path")?;

        let mut objectives = Vec::new();
        let mut obj_cols = Vec::new();
        for o in Objective::ALL {
            if let Some(i) = col(o.column()) {
                objectives.push(o);
                obj_cols.push(i);
            }
        }
        let (var_cols, variables): (Vec<usize>, Vec<String>) = header
            .iter()
            .enumerate()
            .filter_map(|(i, h)| h.strip_prefix(DECISION_PREFIX).map(|n| (i, n.to_string())))
            .unzip();
        if variables.is_empty() {
            return Err(bad("no decision columns (`x:<name>`)".into()));
        }

        let mut records = Vec::new();
        for (line, row) in rd.records().enumerate() {
            let row = row.map_err(malformed)?;
            let at = |e: String| bad(format!("row {}: {e}", line + 1));
            let cell = |i: usize| row.get(i).unwrap_or("");
            let mut objectives_v = ObjectiveVector::default();
            for (o, i) in objectives.iter().zip(&obj_cols) {
                if let Some(v) = parse_opt::<f64>(cell(*i)).map_err(at)? {
                    objectives_v.set(*o, v);
                }
            }
            let decision = var_cols
                .iter()
                .map(|i| parse::<u32>(cell(*i)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(at)?;
            records.push(SimulationRecord {
                iteration: parse(cell(i_iter)).map_err(at)?,
                decision: DecisionVector(decision),
                objectives: objectives_v,
                score: parse_opt(cell(i_score)).map_err(at)?,
                optimized: parse(cell(i_opt)).map_err(at)?,
                unmitigated_duration: parse_opt(cell(i_unmit)).map_err(at)?,
                applied_reductions: parse_list(cell(i_applied)).map_err(at)?,
                critical_path: parse_list(cell(i_cp)).map_err(at)?,
            });
        }
        Ok(Self { objectives, variables, records })
    }
}

fn parse<T: FromStr>(s: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("cannot parse `{s}`"))
}

fn parse_opt<T: FromStr>(s: &str) -> Result<Option<T>, String> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        parse(s).map(Some)
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(parse).collect()
}

fn runtime(e: csv::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn malformed(e: csv::Error) -> CliError {
    bad(e.to_string())
}

fn bad(msg: String) -> CliError {
    CliError::Validation(format!("malformed records table: {msg}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RecordTable {
        let r = SimulationRecord {
            iteration: 3,
            decision: DecisionVector(vec![1, 0, 2]),
            objectives: ObjectiveVector::default()
                .with(Objective::Duration, 0.1 + 0.2)
                .with(Objective::Cost, 1.0e7 / 3.0),
            score: Some(-0.125),
            optimized: true,
            unmitigated_duration: None,
            applied_reductions: vec![],
            critical_path: vec![],
        };
        RecordTable {
            objectives: vec![Objective::Duration, Objective::Cost],
            variables: vec!["small OCV".into(), "large OCV".into(), "barge".into()],
            records: vec![r],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let t = sample();
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let back = RecordTable::read(&buf[..]).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn control_fields_round_trip() {
        let mut t = sample();
        t.records[0].unmitigated_duration = Some(1500.25);
        t.records[0].applied_reductions = vec![0.0, 12.5, 1.0 / 3.0];
        t.records[0].critical_path = vec![1, 4, 37];
        t.records[0].score = None;
        t.records[0].optimized = false;
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert_eq!(RecordTable::read(&buf[..]).unwrap(), t);
    }

    #[test]
    fn header_layout() {
        let h = sample().header();
        assert_eq!(h[..5], ["iteration", "optimized", "score", "O_PD", "O_C"]);
        assert_eq!(h[6], "x:small OCV");
    }

    #[test]
    fn malformed_cell_is_a_validation_error() {
        let text = "iteration,optimized,score,O_PD,unmitigated_duration,x:a,applied_reductions,critical_path\n0,true,,abc,,1,,\n";
        let err = RecordTable::read(text.as_bytes()).unwrap_err();
        assert!(matches!(err, CliError::Validation(ref m) if m.contains("row 1")), "{err}");
    }

    #[test]
    fn missing_column_is_reported() {
        let err = RecordTable::read("iteration,score\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("optimized"));
    }
}
