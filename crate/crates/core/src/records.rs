//! Flat result rows shared by the CLI and the verification suite, written as
//! JSON lines or CSV.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transfer::Energy;

/// One numeric sample. Unused columns stay empty.
///
/// `quantity` names what `lognorm`/`norm_rate` hold: `level` rows carry
/// `ln‖M(s_n)‖` and its rate, `phase` rows the same along a rotation word,
/// `envelope` rows `ln C` and `μ`, `bound` rows the direct log-norm and the
/// certified bound.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub criterion: u8,
    pub quantity: String,
    pub lambda: f64,
    #[serde(rename = "E_re")]
    pub e_re: f64,
    #[serde(rename = "E_im")]
    pub e_im: f64,
    pub theta: Option<f64>,
    pub n: Option<usize>,
    pub len: Option<f64>,
    pub lognorm: Option<f64>,
    pub norm_rate: Option<f64>,
    pub f_upper: Option<f64>,
    pub inf_f: Option<f64>,
    pub band_id: Option<usize>,
    pub error_bound: f64,
}

impl Record {
    pub fn new(criterion: u8, quantity: &str, lambda: f64, energy: Energy) -> Self {
        Record {
            criterion,
            quantity: quantity.to_owned(),
            lambda,
            e_re: energy.re(),
            e_im: energy.im(),
            ..Record::default()
        }
    }
}

pub const CSV_COLUMNS: [&str; 14] = [
    "criterion",
    "quantity",
    "lambda",
    "E_re",
    "E_im",
    "theta",
    "n",
    "len",
    "lognorm",
    "norm_rate",
    "f_upper",
    "inf_f",
    "band_id",
    "error_bound",
];

pub fn write_jsonl<W: Write>(mut out: W, records: &[Record]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::Io(e.into()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// CSV with a leading `# seed=` comment line and a header row.
pub fn write_csv<W: Write>(mut out: W, records: &[Record], seed: u64) -> Result<()> {
    writeln!(out, "# seed={seed}")?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<Record>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    rdr.deserialize().map(|r| r.map_err(csv_err)).collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Record> {
        let mut a = Record::new(6, "level", 1.0, Energy::new(0.25, 0.0));
        a.n = Some(12);
        a.len = Some(233.0);
        a.lognorm = Some(1.5);
        a.norm_rate = Some(1.5 / 233.0);
        a.band_id = Some(3);
        a.error_bound = 1e-13;
        let b = Record::new(7, "phase", 1.0, Energy::new(2.0, 0.5));
        vec![a, b]
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &sample(), 42).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# seed=42\ncriterion,quantity,lambda,E_re,E_im,theta,n,len,"));
        assert_eq!(read_csv(&buf[..]).unwrap(), sample());
    }

    #[test]
    fn jsonl_lines() {
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &sample()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        let first: Record = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first, sample()[0]);
        assert!(text.contains("\"E_re\":0.25"));
    }
}
