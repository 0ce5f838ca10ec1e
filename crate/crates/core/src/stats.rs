use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-EVSE usage statistics over the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvseStats {
    pub row: usize,
    pub col: usize,
    /// Mean charging rate over EV-occupied slots, 0 if never occupied.
    #[serde(rename = "tau_kw")]
    pub tau: f64,
    /// Energy delivered over the horizon.
    #[serde(rename = "p_tot_kwh")]
    pub p_tot: f64,
}

const STATS_HEADER: [&str; 4] = ["row", "col", "tau_kw", "p_tot_kwh"];

pub fn write_stats_csv<W: Write>(stats: &[EvseStats], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    if stats.is_empty() {
        wtr.write_record(STATS_HEADER)?;
    }
    for s in stats {
        wtr.serialize(s)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_stats_csv<R: Read>(r: R) -> Result<Vec<EvseStats>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(STATS_HEADER) {
        return Err(Error::InvalidConfig(format!(
            "stats file: unexpected header {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    Ok(rdr
        .deserialize::<EvseStats>()
        .collect::<std::result::Result<Vec<_>, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let stats = vec![
            EvseStats {
                row: 1,
                col: 2,
                tau: 5.0,
                p_tot: 10.0,
            },
            EvseStats {
                row: 3,
                col: 0,
                tau: 0.0,
                p_tot: 0.0,
            },
        ];
        let mut buf = Vec::new();
        write_stats_csv(&stats, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("row,col,tau_kw,p_tot_kwh\n"));
        assert_eq!(read_stats_csv(text.as_bytes()).unwrap(), stats);
    }
}
