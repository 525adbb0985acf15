use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{OutputFormat, PolicySummary};
use crate::error::Result;

const CSV_HEADER: [&str; 5] = ["policy", "round", "mean_cum_regret", "stderr", "alarms"];

#[derive(Serialize)]
struct JsonDocument<'a> {
    policies: &'a [PolicySummary],
}

/// Writes per-policy, per-round summaries. Output depends only on the
/// summaries, so identical inputs give identical bytes.
pub fn write_results<W: Write>(
    summaries: &[PolicySummary],
    format: OutputFormat,
    writer: W,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut csv = csv::Writer::from_writer(writer);
            csv.write_record(CSV_HEADER)?;
            for s in summaries {
                for row in &s.rows {
                    csv.write_record([
                        s.policy.clone(),
                        row.round.to_string(),
                        row.mean_cum_regret.to_string(),
                        row.stderr.to_string(),
                        row.alarms.to_string(),
                    ])?;
                }
            }
            csv.flush()?;
        }
        OutputFormat::Json => {
            let mut writer = writer;
            serde_json::to_writer_pretty(
                &mut writer,
                &JsonDocument {
                    policies: summaries,
                },
            )?;
            writer.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// [`write_results`] into a file, creating parent directories.
pub fn emit_results(
    summaries: &[PolicySummary],
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_results(summaries, format, file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::summarize;
    use crate::pareto::RegretTrace;

    fn render(summaries: &[PolicySummary], format: OutputFormat) -> String {
        let mut buf = Vec::new();
        write_results(summaries, format, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_input_is_header_only() {
        assert_eq!(
            render(&[], OutputFormat::Csv),
            "policy,round,mean_cum_regret,stderr,alarms\n"
        );
        let json: serde_json::Value =
            serde_json::from_str(&render(&[], OutputFormat::Json)).unwrap();
        assert_eq!(json["policies"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn csv_rows() {
        let mut t = RegretTrace::default();
        t.push(1, 0.25);
        t.push(0, 0.0);
        let s = summarize("p".into(), &[(0, t)]);
        assert_eq!(
            render(&[s], OutputFormat::Csv),
            "policy,round,mean_cum_regret,stderr,alarms\np,1,0.25,0,0\np,2,0.25,0,0\n"
        );
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = emit_results(&[], blocker.join("out.csv"), OutputFormat::Csv).unwrap_err();
        assert!(matches!(err, crate::Error::Io(_)), "{err:?}");
    }
}
