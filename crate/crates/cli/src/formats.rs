// Copyright 2026 The pdc-bell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! File formats: state dumps, count tables and CSV float formatting.

use std::io::{Read, Write};

use pdc_bell_core::bell::CountsTable;
use pdc_bell_core::{GPoly, Ket, KetSeries};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Fixed 17-significant-digit scientific notation, locale-free.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDump {
    pub occupation: [u32; 4],
    /// `[re, im]` of the coefficient of `g^k`, `k = 0..=max_order`.
    pub coefficients: Vec<[f64; 2]>,
}

pub fn poly_pairs(p: &GPoly) -> Vec<[f64; 2]> {
    p.coeffs().iter().map(|c| [c.re, c.im]).collect()
}

pub fn dump_state(state: &KetSeries) -> Vec<TermDump> {
    state
        .iter()
        .map(|(o, p)| TermDump {
            occupation: o.counts(),
            coefficients: poly_pairs(p),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeDump {
    pub occupation: [u32; 4],
    pub amplitude: [f64; 2],
}

pub fn dump_amplitudes(ket: &Ket) -> Vec<AmplitudeDump> {
    ket.iter()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(o, a)| AmplitudeDump {
            occupation: o.counts(),
            amplitude: [a.re, a.im],
        })
        .collect()
}

const OUTCOME_PAIRS: [(i8, i8); 8] = [
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
];

/// `r,s,alpha,beta,count` rows, every outcome pair at every setting (zeros
/// included, so settings survive a round trip), then `TOTAL,,,,N`.
pub fn write_counts<W: Write>(table: &CountsTable, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "s", "alpha", "beta", "count"])?;
    for (alpha, beta) in table.settings() {
        for (r, s) in OUTCOME_PAIRS {
            let n = table.count(r, s, alpha, beta)?;
            w.write_record([
                r.to_string(),
                s.to_string(),
                fmt_f64(alpha),
                fmt_f64(beta),
                n.to_string(),
            ])?;
        }
    }
    w.write_record(["TOTAL", "", "", "", &table.n_tot().to_string()])?;
    w.flush().map_err(|e| CliError::Csv(e.to_string()))?;
    Ok(())
}

pub fn read_counts<R: Read>(input: R) -> Result<CountsTable, CliError> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let headers = rd.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["r", "s", "alpha", "beta", "count"] {
        return Err(CliError::Csv(format!("unexpected header {headers:?}")));
    }
    let mut table = CountsTable::new(0);
    let mut total = None;
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let bad = |what: &str| CliError::Csv(format!("line {line}: invalid {what}"));
        if field(0) == "TOTAL" {
            total = Some(field(4).parse::<u64>().map_err(|_| bad("total"))?);
            continue;
        }
        let r: i8 = field(0).parse().map_err(|_| bad("r"))?;
        let s: i8 = field(1).parse().map_err(|_| bad("s"))?;
        let alpha: f64 = field(2).parse().map_err(|_| bad("alpha"))?;
        let beta: f64 = field(3).parse().map_err(|_| bad("beta"))?;
        let n: u64 = field(4).parse().map_err(|_| bad("count"))?;
        table.add(r, s, alpha, beta, n)?;
    }
    let total = total.ok_or_else(|| CliError::Csv("missing TOTAL row".into()))?;
    table.set_n_tot(total);
    table.validate()?;
    Ok(table)
}
