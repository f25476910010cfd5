//! CSV output of BER records.
//!
//! ```text
//! # schema: qce-ber/1
//! # <key>: <value>        (one line per metadata entry)
//! precoder,modulation,q,n,m,ptx_db,nu,channels,bit_errors,bits_total,ber,std_err,mean_delta,mean_alpha,mean_iterations,mean_op_count
//! msm,QPSK,4,64,8,-15,0,20,…
//! ```
//!
//! Optional columns are empty when they do not apply (e.g. `q` for
//! unquantized schemes, the solver statistics for linear precoders).

use std::io::{Read, Write};

use super::BerRecord;

pub const CSV_SCHEMA: &str = "qce-ber/1";

pub fn write_csv<W: Write>(
    mut out: W,
    records: &[BerRecord],
    meta: &[(String, String)],
) -> Result<(), csv::Error> {
    writeln!(out, "# schema: {CSV_SCHEMA}")?;
    for (k, v) in meta {
        writeln!(out, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_csv`], returning metadata and records.
pub fn read_csv<R: Read>(mut input: R) -> Result<(Vec<(String, String)>, Vec<BerRecord>), csv::Error> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let meta = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| l.trim_start_matches('#').trim().split_once(": "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let records = reader.deserialize().collect::<Result<Vec<BerRecord>, _>>()?;
    Ok((meta, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(ptx_db: f64, q: Option<usize>) -> BerRecord {
        BerRecord {
            precoder: "msm".into(),
            modulation: "16QAM".into(),
            q,
            n: 64,
            m: 8,
            ptx_db,
            nu: 0.1,
            channels: 20,
            bit_errors: 12,
            bits_total: 4096,
            ber: 12.0 / 4096.0,
            std_err: 1e-3,
            mean_delta: Some(0.25),
            mean_alpha: q.map(|_| 0.5),
            mean_iterations: None,
            mean_op_count: Some(1234.5),
        }
    }

    #[test]
    fn round_trip_with_metadata() {
        let records = vec![record(-3.0, Some(4)), record(0.5, None)];
        let meta = vec![("seed".to_string(), "7".to_string()), ("n".to_string(), "64".to_string())];
        let mut buf = Vec::new();
        write_csv(&mut buf, &records, &meta).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# schema: qce-ber/1\n# seed: 7\n# n: 64\nprecoder,modulation,q,"));
        let (meta_back, back) = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, records);
        assert_eq!(meta_back[0], ("schema".to_string(), CSV_SCHEMA.to_string()));
        assert_eq!(&meta_back[1..], &meta[..]);
    }
}
