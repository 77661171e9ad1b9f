//! Per-instance solve records and their CSV / JSON forms.

use std::io::Write;

use serde::Serialize;
use tightspan_core::balance::{BoundKind as UmBound, UmSchedule};
use tightspan_core::oracle::OracleResult;
use tightspan_core::rational::{int, Rational};
use tightspan_core::restricted::{RatioCertificate, RestrictedSolution};
use tightspan_core::{Instance, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    #[serde(rename = "T_plus_L_over_eps")]
    TPlusLOverEps,
    #[serde(rename = "two_T")]
    TwoT,
    #[serde(rename = "pmax_plus_L_over_eps")]
    PmaxPlusLOverEps,
    /// Oracle rows: the makespan is the optimum itself.
    #[serde(rename = "optimal")]
    Optimal,
}

impl From<UmBound> for BoundKind {
    fn from(b: UmBound) -> Self {
        match b {
            UmBound::TPlusLOverEps => BoundKind::TPlusLOverEps,
            UmBound::TwoT => BoundKind::TwoT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    General,
    Restricted,
    Oracle,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::General => "general",
            Mode::Restricted => "restricted",
            Mode::Oracle => "oracle",
        }
    }
}

/// Serializes exact rationals as `"num/den"` (or a plain integer string).
mod exact {
    use serde::Serializer;
    use tightspan_core::rational::Rational;

    pub fn ser<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn opt<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.collect_str(r),
            None => s.serialize_none(),
        }
    }
}

/// One row of a report. Rationals are exact; `makespan <= certified_bound`
/// is checked when the row is built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub id: String,
    pub mode: Mode,
    pub m: usize,
    pub n: usize,
    #[serde(serialize_with = "exact::ser")]
    pub epsilon: Rational,
    #[serde(rename = "L", serialize_with = "exact::ser")]
    pub l: Rational,
    #[serde(rename = "T")]
    pub t: Option<Time>,
    pub makespan: Time,
    #[serde(serialize_with = "exact::ser")]
    pub certified_bound: Rational,
    pub bound_kind: BoundKind,
    #[serde(serialize_with = "exact::opt")]
    pub q: Option<Rational>,
    /// `1 + q/eps`, restricted rows with `q < eps`.
    #[serde(serialize_with = "exact::opt")]
    pub ratio_bound: Option<Rational>,
    pub opt: Option<Time>,
    #[serde(serialize_with = "exact::opt")]
    pub ratio_vs_opt: Option<Rational>,
    pub beats_33_17: bool,
    pub moves: u64,
    pub pivots: u64,
    /// Feasible (job, machine) pairs.
    #[serde(rename = "S")]
    pub s: usize,
    /// `sum_j min_i p_ij`, which is `sum_j p_j` for restricted instances.
    #[serde(rename = "W")]
    pub w: Time,
    pub wall_ms: f64,
    pub violation: bool,
}

impl SolveReport {
    fn base(id: &str, mode: Mode, inst: &Instance) -> Self {
        SolveReport {
            id: id.to_string(),
            mode,
            m: inst.machines(),
            n: inst.jobs(),
            epsilon: int(0),
            l: int(0),
            t: None,
            makespan: 0,
            certified_bound: int(0),
            bound_kind: BoundKind::Optimal,
            q: None,
            ratio_bound: None,
            opt: None,
            ratio_vs_opt: None,
            beats_33_17: false,
            moves: 0,
            pivots: 0,
            s: inst.feasible_pairs(),
            w: inst.total_min_time(),
            wall_ms: 0.0,
            violation: false,
        }
    }

    pub fn general(id: &str, inst: &Instance, t: Time, l: Rational, s: &UmSchedule) -> Self {
        let mut row = Self::base(id, Mode::General, inst);
        row.epsilon = s.epsilon;
        row.l = l;
        row.t = Some(t);
        row.makespan = s.makespan;
        row.certified_bound = s.bound;
        row.bound_kind = s.bound_kind.into();
        row.pivots = s.pivots as u64;
        row.moves = s.transfers.len() as u64;
        row.seal()
    }

    pub fn restricted(
        id: &str,
        inst: &Instance,
        s: &RestrictedSolution,
        cert: &RatioCertificate,
    ) -> Self {
        let mut row = Self::base(id, Mode::Restricted, inst);
        row.epsilon = s.epsilon;
        row.l = s.average_load;
        row.makespan = s.makespan;
        row.certified_bound = s.bound;
        row.bound_kind = BoundKind::PmaxPlusLOverEps;
        row.q = Some(cert.q);
        row.ratio_bound = cert.ratio;
        row.beats_33_17 = cert.beats_33_17;
        row.moves = s.moves + s.pushes;
        row.seal()
    }

    pub fn oracle(id: &str, inst: &Instance, r: &OracleResult) -> Self {
        let mut row = Self::base(id, Mode::Oracle, inst);
        row.epsilon = inst.feasibility_factor(r.opt_makespan.max(1));
        row.l = inst.average_load(&r.witness);
        row.makespan = r.opt_makespan;
        row.certified_bound = int(r.opt_makespan);
        row.opt = Some(r.opt_makespan);
        row.moves = r.nodes_explored;
        row.seal()
    }

    /// Attaches the optimum and the exact ratio `makespan / OPT`.
    pub fn with_opt(mut self, opt: Time) -> Self {
        self.opt = Some(opt);
        self.ratio_vs_opt = Some(if opt == 0 {
            int(1)
        } else {
            Rational::new(self.makespan as i128, opt as i128)
        });
        self
    }

    pub fn with_wall_ms(mut self, ms: f64) -> Self {
        self.wall_ms = ms;
        self
    }

    fn seal(mut self) -> Self {
        self.violation = int(self.makespan) > self.certified_bound;
        self
    }
}

/// A row that could not be produced; reported rather than dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailedRow {
    pub id: String,
    pub mode: Mode,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
#[allow(clippy::large_enum_variant)]
pub enum Row {
    Solved(SolveReport),
    Failed(FailedRow),
}

impl Row {
    pub fn report(&self) -> Option<&SolveReport> {
        match self {
            Row::Solved(r) => Some(r),
            Row::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub errors: usize,
    pub violations: usize,
    #[serde(serialize_with = "exact::opt")]
    pub max_ratio_vs_opt: Option<Rational>,
    pub flagged_33_17: usize,
}

pub fn summarize(rows: &[Row]) -> Summary {
    let solved: Vec<&SolveReport> = rows.iter().filter_map(Row::report).collect();
    Summary {
        rows: rows.len(),
        errors: rows.len() - solved.len(),
        violations: solved.iter().filter(|r| r.violation).count(),
        max_ratio_vs_opt: solved.iter().filter_map(|r| r.ratio_vs_opt).max(),
        flagged_33_17: solved.iter().filter(|r| r.beats_33_17).count(),
    }
}

/// Column order of the CSV report.
pub const CSV_COLUMNS: [&str; 22] = [
    "id",
    "mode",
    "m",
    "n",
    "epsilon",
    "L",
    "T",
    "makespan",
    "certified_bound",
    "bound_kind",
    "q",
    "ratio_bound",
    "opt",
    "ratio_vs_opt",
    "beats_33_17",
    "moves",
    "pivots",
    "S",
    "W",
    "wall_ms",
    "violation",
    "error",
];

fn opt_str<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn bound_kind_name(b: BoundKind) -> &'static str {
    match b {
        BoundKind::TPlusLOverEps => "T_plus_L_over_eps",
        BoundKind::TwoT => "two_T",
        BoundKind::PmaxPlusLOverEps => "pmax_plus_L_over_eps",
        BoundKind::Optimal => "optimal",
    }
}

fn csv_record(row: &Row) -> Vec<String> {
    match row {
        Row::Solved(r) => vec![
            r.id.clone(),
            r.mode.name().into(),
            r.m.to_string(),
            r.n.to_string(),
            r.epsilon.to_string(),
            r.l.to_string(),
            opt_str(&r.t),
            r.makespan.to_string(),
            r.certified_bound.to_string(),
            bound_kind_name(r.bound_kind).into(),
            opt_str(&r.q),
            opt_str(&r.ratio_bound),
            opt_str(&r.opt),
            opt_str(&r.ratio_vs_opt),
            r.beats_33_17.to_string(),
            r.moves.to_string(),
            r.pivots.to_string(),
            r.s.to_string(),
            r.w.to_string(),
            format!("{:.3}", r.wall_ms),
            (r.violation as u8).to_string(),
            String::new(),
        ],
        Row::Failed(f) => {
            let mut rec = vec![String::new(); CSV_COLUMNS.len()];
            rec[0] = f.id.clone();
            rec[1] = f.mode.name().into();
            rec[CSV_COLUMNS.len() - 1] = f.error.clone();
            rec
        }
    }
}

/// Header, one record per row, and (when there are rows) a closing
/// `#summary` record carrying the violation count and the largest ratio.
pub fn write_csv<W: Write>(out: W, rows: &[Row]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.write_record(csv_record(row))?;
    }
    if !rows.is_empty() {
        let s = summarize(rows);
        let mut rec = vec![String::new(); CSV_COLUMNS.len()];
        rec[0] = "#summary".into();
        rec[1] = "all".into();
        rec[13] = opt_str(&s.max_ratio_vs_opt);
        rec[14] = s.flagged_33_17.to_string();
        rec[20] = s.violations.to_string();
        rec[21] = if s.errors > 0 {
            format!("{} rows failed", s.errors)
        } else {
            String::new()
        };
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    rows: &'a [Row],
    summary: Summary,
}

pub fn to_json(rows: &[Row]) -> String {
    serde_json::to_string_pretty(&JsonReport {
        rows,
        summary: summarize(rows),
    })
    .expect("reports serialize")
}
