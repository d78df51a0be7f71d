//! Line-delimited trace file format shared by the simulator and all
//! inference backends.
//!
//! A trace starts with a header line carrying the format version, the master
//! seed, and scenario metadata (including the simulator's ground truth), then
//! one record per line:
//!
//! ```text
//! #trust-trace v1<TAB>seed=42<TAB>truth.alice=static:0.8
//! step<TAB>trustor<TAB>trustee<TAB>kind<TAB>payload
//! ```
//!
//! Payloads are kind-specific comma-separated fields: `n,m` for binary
//! batches, `c1,...,cb` for categorical batches, `theta_a,n,m` for advisor
//! reports, `y0;y1,...,yn` for voting vectors and `b,d,i,w` for opinion
//! reports. Floats are printed in Rust's shortest round-trippable form, so a
//! parsed trace is bit-identical to the one written.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::opinion::Opinion;
use crate::trust::{Observation, TrustScalar};

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceHeader {
    pub seed: u64,
    /// Free-form scenario metadata; `truth.<agent>` keys carry the
    /// simulator's ground-truth behavior specs.
    pub meta: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: u64,
    pub trustor: String,
    pub trustee: String,
    pub observation: Observation,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

/// Agent identifiers appear as bare fields in the trace, so they must be
/// free of the format's delimiters.
pub fn validate_agent_id(id: &str) -> Result<()> {
    if id.is_empty()
        || id
            .chars()
            .any(|c| c.is_whitespace() || c == ',' || c == ';' || c == '=' || c == ':')
    {
        return Err(Error::InvalidInput(format!(
            "agent id {id:?} is empty or contains a delimiter"
        )));
    }
    Ok(())
}

fn payload(obs: &Observation) -> String {
    match obs {
        Observation::BinaryBatch { n, m } => format!("{n},{m}"),
        Observation::CategoricalBatch { counts } => counts
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(","),
        Observation::AdvisorReport {
            advisor_trust,
            n,
            m,
        } => format!("{},{n},{m}", advisor_trust.value()),
        Observation::VotingVector { own, neighbors } => {
            let mut s = String::new();
            let _ = write!(s, "{own};");
            s.push_str(
                &neighbors
                    .iter()
                    .map(|y| y.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
            s
        }
        Observation::OpinionReport { opinion } => format!(
            "{},{},{},{}",
            opinion.belief, opinion.disbelief, opinion.ignorance, opinion.evidence_weight
        ),
    }
}

fn parse_err(line_no: usize, what: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("trace line {line_no}: {what}"))
}

fn parse_f64(s: &str, line_no: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| parse_err(line_no, format!("bad float {s:?}")))
}

fn parse_u64(s: &str, line_no: usize) -> Result<u64> {
    s.parse::<u64>()
        .map_err(|_| parse_err(line_no, format!("bad integer {s:?}")))
}

fn parse_observation(kind: &str, payload: &str, line_no: usize) -> Result<Observation> {
    let obs = match kind {
        "binary" => {
            let parts: Vec<&str> = payload.split(',').collect();
            if parts.len() != 2 {
                return Err(parse_err(line_no, "binary payload needs n,m"));
            }
            Observation::BinaryBatch {
                n: parse_u64(parts[0], line_no)?,
                m: parse_u64(parts[1], line_no)?,
            }
        }
        "categorical" => {
            let counts = payload
                .split(',')
                .map(|c| parse_u64(c, line_no))
                .collect::<Result<Vec<_>>>()?;
            Observation::CategoricalBatch { counts }
        }
        "advisor" => {
            let parts: Vec<&str> = payload.split(',').collect();
            if parts.len() != 3 {
                return Err(parse_err(line_no, "advisor payload needs theta_a,n,m"));
            }
            Observation::AdvisorReport {
                advisor_trust: TrustScalar::new(parse_f64(parts[0], line_no)?)
                    .map_err(|e| parse_err(line_no, e))?,
                n: parse_u64(parts[1], line_no)?,
                m: parse_u64(parts[2], line_no)?,
            }
        }
        "voting" => {
            let (own, rest) = payload
                .split_once(';')
                .ok_or_else(|| parse_err(line_no, "voting payload needs y0;y1,...,yn"))?;
            let neighbors = if rest.is_empty() {
                Vec::new()
            } else {
                rest.split(',')
                    .map(|y| parse_f64(y, line_no))
                    .collect::<Result<Vec<_>>>()?
            };
            Observation::VotingVector {
                own: parse_f64(own, line_no)?,
                neighbors,
            }
        }
        "opinion" => {
            let parts: Vec<&str> = payload.split(',').collect();
            if parts.len() != 4 {
                return Err(parse_err(line_no, "opinion payload needs b,d,i,w"));
            }
            Observation::OpinionReport {
                opinion: Opinion::new(
                    parse_f64(parts[0], line_no)?,
                    parse_f64(parts[1], line_no)?,
                    parse_f64(parts[2], line_no)?,
                    parse_f64(parts[3], line_no)?,
                )
                .map_err(|e| parse_err(line_no, e))?,
            }
        }
        other => {
            return Err(parse_err(
                line_no,
                format!("unknown observation kind {other:?}"),
            ))
        }
    };
    obs.validate().map_err(|e| parse_err(line_no, e))?;
    Ok(obs)
}

impl Trace {
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "#trust-trace v{TRACE_VERSION}\tseed={}", self.header.seed)?;
        for (k, v) in &self.header.meta {
            write!(w, "\t{k}={v}")?;
        }
        writeln!(w)?;
        for r in &self.records {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}",
                r.step,
                r.trustor,
                r.trustee,
                r.observation.kind(),
                payload(&r.observation)
            )?;
        }
        Ok(())
    }

    pub fn to_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("trace text is UTF-8")
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut header = None;
        let mut records = Vec::new();
        let mut last_step = 0u64;
        for (i, line) in r.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| parse_err(line_no, e))?;
            if line.is_empty() {
                continue;
            }
            if line.starts_with('#') {
                if header.is_some() {
                    return Err(parse_err(line_no, "duplicate header"));
                }
                let mut fields = line.split('\t');
                let magic = fields.next().unwrap_or("");
                if magic != format!("#trust-trace v{TRACE_VERSION}") {
                    return Err(parse_err(line_no, format!("unsupported header {magic:?}")));
                }
                let mut h = TraceHeader::default();
                for field in fields {
                    let (k, v) = field
                        .split_once('=')
                        .ok_or_else(|| parse_err(line_no, format!("bad header field {field:?}")))?;
                    if k == "seed" {
                        h.seed = parse_u64(v, line_no)?;
                    } else {
                        h.meta.insert(k.to_string(), v.to_string());
                    }
                }
                header = Some(h);
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 5 {
                return Err(parse_err(line_no, "record needs 5 tab-separated fields"));
            }
            let step = parse_u64(parts[0], line_no)?;
            if step < last_step {
                return Err(parse_err(line_no, "steps must be non-decreasing"));
            }
            last_step = step;
            validate_agent_id(parts[1]).map_err(|e| parse_err(line_no, e))?;
            validate_agent_id(parts[2]).map_err(|e| parse_err(line_no, e))?;
            records.push(TraceRecord {
                step,
                trustor: parts[1].to_string(),
                trustee: parts[2].to_string(),
                observation: parse_observation(parts[3], parts[4], line_no)?,
            });
        }
        Ok(Trace {
            header: header.ok_or_else(|| Error::InvalidInput("trace has no header".into()))?,
            records,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::read_from(text.as_bytes())
    }
}
