//! Deficiency-threshold randomness tests.
//!
//! A word is rejected at level `m` when its deficiency `n*H - K_eff` is at
//! least `m` bits, equivalently when `R <= c(m) = 1 - m / (n*H)`. Within a
//! shell, a prefix-free code can give at most a `2^-t` fraction of words a
//! deficiency of `t` bits, which is what calibrates the test.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::bits::BitWord;
use crate::coders::{CoderId, LengthMode};
use crate::combinatorics::binomial;
use crate::entropy::{shell_log_size, SymbolCounts};
use crate::error::{Error, Result};
use crate::sim::{derive_seed, generate, GeneratorSpec, MeasureKind};
use crate::stats::{ser_opt_sig6, ser_sig6};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestConfig {
    /// Deficiency threshold in bits.
    pub m: u32,
    pub coder: CoderId,
    /// Subtract `2*log2(prefix_len + 1)` in prefix scans.
    pub penalty: bool,
    pub mode: LengthMode,
}

impl TestConfig {
    pub fn new(m: u32, coder: CoderId) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("threshold m must be at least 1".into()));
        }
        Ok(Self {
            m,
            coder,
            penalty: true,
            mode: LengthMode::Ideal,
        })
    }

    pub fn with_mode(mut self, mode: LengthMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_penalty(mut self, penalty: bool) -> Self {
        self.penalty = penalty;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
    ConstantWord,
}

impl Decision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::Accept => "accept",
            Decision::Reject => "reject",
            Decision::ConstantWord => "constant-word",
        }
    }
}

impl Serialize for Decision {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestVerdict {
    pub decision: Decision,
    #[serde(serialize_with = "ser_opt_sig6")]
    pub R: Option<f64>,
    #[serde(serialize_with = "ser_opt_sig6")]
    pub deficiency: Option<f64>,
    #[serde(serialize_with = "ser_opt_sig6")]
    pub threshold: Option<f64>,
    pub m: u32,
    pub coder: CoderId,
    pub n: u64,
    pub w: u64,
}

/// Deficiency of a non-constant word, `None` for constant words.
fn deficiency(word: &BitWord, coder: CoderId, mode: LengthMode) -> Option<(f64, f64)> {
    if word.is_constant() {
        return None;
    }
    let baseline = word.len() as f64 * SymbolCounts::of(word).entropy();
    Some((baseline, baseline - coder.code(word).len(mode)))
}

pub fn test_word(word: &BitWord, cfg: &TestConfig) -> TestVerdict {
    let counts = SymbolCounts::of(word);
    let mut verdict = TestVerdict {
        decision: Decision::ConstantWord,
        R: None,
        deficiency: None,
        threshold: None,
        m: cfg.m,
        coder: cfg.coder,
        n: counts.n(),
        w: counts.n1,
    };
    if let Some((baseline, d)) = deficiency(word, cfg.coder, cfg.mode) {
        verdict.decision = if d >= f64::from(cfg.m) {
            Decision::Reject
        } else {
            Decision::Accept
        };
        verdict.R = Some((baseline - d) / baseline);
        verdict.deficiency = Some(d);
        verdict.threshold = Some(1.0 - f64::from(cfg.m) / baseline);
    }
    verdict
}

/// `ceil(4 * 1.25^j)` for `j = 0, 1, ...`, capped at and ending with `n`.
/// Computed on integers as `ceil(4 * 5^j / 4^j)`.
pub fn prefix_schedule(n: usize) -> Result<Vec<usize>> {
    if n < 4 {
        return Err(Error::Config(format!(
            "prefix scan needs at least 4 bits, got {n}"
        )));
    }
    let mut out = Vec::new();
    let mut five = BigUint::from(4u8);
    let mut four = BigUint::from(1u8);
    loop {
        let q: BigUint = (&five + &four - 1u8) / &four;
        let m = q.to_usize().unwrap_or(usize::MAX).min(n);
        if out.last() != Some(&m) {
            out.push(m);
        }
        if m == n {
            return Ok(out);
        }
        five *= 5u8;
        four *= 4u8;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixRow {
    pub length: usize,
    /// `None` while the prefix is constant.
    #[serde(serialize_with = "ser_opt_sig6")]
    pub deficiency: Option<f64>,
    #[serde(serialize_with = "ser_opt_sig6")]
    pub penalized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixScanResult {
    pub rows: Vec<PrefixRow>,
    /// Index into `rows` of the first flagged prefix.
    pub first_flag: Option<usize>,
}

impl PrefixScanResult {
    pub fn flagged_length(&self) -> Option<usize> {
        self.first_flag.map(|i| self.rows[i].length)
    }
}

/// Scans the prefixes of `word` on the geometric schedule and flags the
/// first one whose (optionally penalized) deficiency reaches `cfg.m`.
pub fn prefix_scan(word: &BitWord, cfg: &TestConfig) -> Result<PrefixScanResult> {
    let schedule = prefix_schedule(word.len())?;
    let rows: Vec<PrefixRow> = schedule
        .par_iter()
        .map(|&len| {
            let prefix = word.prefix(len).expect("schedule within word");
            let d = deficiency(&prefix, cfg.coder, cfg.mode).map(|(_, d)| d);
            let penalty = if cfg.penalty {
                2.0 * (len as f64 + 1.0).log2()
            } else {
                0.0
            };
            PrefixRow {
                length: len,
                deficiency: d,
                penalized: d.map(|d| d - penalty),
            }
        })
        .collect();
    let first_flag = rows
        .iter()
        .position(|r| r.penalized.is_some_and(|p| p >= f64::from(cfg.m)));
    Ok(PrefixScanResult { rows, first_flag })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub k: u64,
    pub t: u32,
    pub count: u64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditTable {
    pub n: u32,
    pub coder: CoderId,
    pub rows: Vec<AuditRow>,
}

impl AuditTable {
    pub fn violations(&self) -> impl Iterator<Item = &AuditRow> {
        self.rows.iter().filter(|r| !r.ok)
    }

    pub fn passed(&self) -> bool {
        self.violations().next().is_none()
    }
}

pub const AUDIT_MAX_T: u32 = 8;
pub const AUDIT_MAX_N: u32 = 16;

/// Exhaustive in-shell rarity audit: for each shell `(n, k)` and
/// `t = 0..=8`, counts the words with `log2 C(n,k) - concrete_len >= t` and
/// checks the count against `2^(1-t) * C(n, k)`.
pub fn counting_lemma_audit(n: u32, coder: CoderId) -> Result<AuditTable> {
    if n == 0 || n > AUDIT_MAX_N {
        return Err(Error::Config(format!(
            "audit enumerates all words; n must be in 1..={AUDIT_MAX_N}"
        )));
    }
    let shells: Vec<f64> = (0..=u64::from(n))
        .map(|k| shell_log_size(u64::from(n), k))
        .collect::<Result<_>>()?;
    let width = (AUDIT_MAX_T + 1) as usize;
    let counts = (0u64..1 << n)
        .into_par_iter()
        .fold(
            || vec![0u64; (n as usize + 1) * width],
            |mut acc, v| {
                let word = BitWord::from_u64(v, n as usize).expect("n >= 1");
                let k = word.weight();
                let len = coder.code(&word).concrete_len.expect("concrete coder") as f64;
                let d = shells[k] - len;
                for t in 0..=AUDIT_MAX_T {
                    if d >= f64::from(t) {
                        acc[k * width + t as usize] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; (n as usize + 1) * width],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut rows = Vec::new();
    for k in 0..=n as usize {
        let size = binomial(u64::from(n), k as u64)?
            .to_f64()
            .expect("small shell");
        for t in 0..=AUDIT_MAX_T {
            let count = counts[k * width + t as usize];
            let bound = 2f64.powi(1 - t as i32) * size;
            rows.push(AuditRow {
                k: k as u64,
                t,
                count,
                bound,
                ok: count as f64 <= bound,
            });
        }
    }
    Ok(AuditTable { n, coder, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FprRow {
    pub m: u32,
    pub trials: u64,
    pub rejections: u64,
    #[serde(serialize_with = "ser_sig6")]
    pub rate: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub bound: f64,
}

pub const FPR_MAX_M: u32 = 8;

/// Empirical rejection rates under Bernoulli(`p`) for `m = 1..=8`. Trial `i`
/// uses the seed `derive_seed(seed, i)`, so the result does not depend on
/// how trials are scheduled across threads.
pub fn monte_carlo_fpr(
    p: f64,
    n: usize,
    cfg: &TestConfig,
    trials: u64,
    seed: u64,
) -> Result<Vec<FprRow>> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let kind = MeasureKind::Bernoulli { p };
    kind.validate()?;
    let deficiencies: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let word = generate(&GeneratorSpec::new(kind.clone(), derive_seed(seed, i), n))?;
            Ok(deficiency(&word, cfg.coder, cfg.mode).map(|(_, d)| d))
        })
        .collect::<Result<_>>()?;
    Ok((1..=FPR_MAX_M)
        .map(|m| {
            let rejections = deficiencies
                .iter()
                .filter(|d| d.is_some_and(|d| d >= f64::from(m)))
                .count() as u64;
            FprRow {
                m,
                trials,
                rejections,
                rate: rejections as f64 / trials as f64,
                bound: 2f64.powi(2 - m as i32),
            }
        })
        .collect())
}

/// CSV with columns `m, trials, rejections, rate, bound`.
pub fn fpr_to_csv<W: std::io::Write>(rows: &[FprRow], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["m", "trials", "rejections", "rate", "bound"])
        .map_err(crate::sim::csv_err)?;
    for r in rows {
        wtr.write_record([
            r.m.to_string(),
            r.trials.to_string(),
            r.rejections.to_string(),
            crate::stats::sig6(r.rate).to_string(),
            crate::stats::sig6(r.bound).to_string(),
        ])
        .map_err(crate::sim::csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SECTION6: &str = "01010001001000001010000100000100001";

    #[test]
    fn section6_accepted() {
        let x: BitWord = SECTION6.parse().unwrap();
        let v = test_word(&x, &TestConfig::new(5, CoderId::Shell).unwrap());
        assert_eq!(v.decision, Decision::Accept);
        assert!((v.threshold.unwrap() - 0.826).abs() < 0.01);
        assert!((v.R.unwrap() - 1.085).abs() < 0.02);
        assert_eq!((v.n, v.w), (35, 9));
    }

    #[test]
    fn alternating_rejected() {
        let alt = BitWord::alternating(1000).unwrap();
        let v = test_word(&alt, &TestConfig::new(5, CoderId::ModelClass).unwrap());
        assert_eq!(v.decision, Decision::Reject);
        assert!(v.deficiency.unwrap() > 980.0);
    }

    #[test]
    fn constant_channel() {
        let v = test_word(
            &BitWord::zeros(40).unwrap(),
            &TestConfig::new(5, CoderId::Shell).unwrap(),
        );
        assert_eq!(v.decision, Decision::ConstantWord);
        assert!(v.R.is_none());
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"decision\":\"constant-word\""));
        assert!(json.contains("\"R\":null"));
    }

    #[test]
    fn zero_threshold_rejected() {
        assert!(TestConfig::new(0, CoderId::Shell).is_err());
    }

    #[test]
    fn schedule_shape() {
        let s = prefix_schedule(100).unwrap();
        assert_eq!(&s[..6], &[4, 5, 7, 8, 10, 13]);
        assert_eq!(*s.last().unwrap(), 100);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(prefix_schedule(4).unwrap(), vec![4]);
        assert!(prefix_schedule(3).is_err());
    }

    #[test]
    fn constant_prefix_then_random_tail() {
        let mut bits = vec![0u8; 64];
        bits.extend((0..512u32).map(|i| ((i.wrapping_mul(2654435761) >> 7) & 1) as u8));
        let word = BitWord::new(bits).unwrap();
        let scan = prefix_scan(&word, &TestConfig::new(10, CoderId::Shell).unwrap()).unwrap();
        let constant_rows = scan.rows.iter().filter(|r| r.deficiency.is_none()).count();
        assert!(constant_rows > 0);
        assert!(scan.rows.iter().take(constant_rows).all(|r| r.length <= 64));
        assert!(scan.rows.last().unwrap().deficiency.is_some());
    }

    #[test]
    fn audit_run_length_n10() {
        let table = counting_lemma_audit(10, CoderId::RunLength).unwrap();
        assert!(table.passed());
        assert_eq!(table.rows.len(), 11 * 9);
        for row in table.rows.iter().filter(|r| r.t == 0) {
            assert!(row.bound >= row.count as f64);
        }
        assert!(counting_lemma_audit(17, CoderId::Shell).is_err());
    }

    #[test]
    fn fpr_is_deterministic() {
        let cfg = TestConfig::new(1, CoderId::Shell)
            .unwrap()
            .with_mode(LengthMode::Concrete);
        let a = monte_carlo_fpr(0.3, 64, &cfg, 500, 11).unwrap();
        let b = monte_carlo_fpr(0.3, 64, &cfg, 500, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        assert!(monte_carlo_fpr(0.3, 64, &cfg, 0, 11).is_err());
        assert!(monte_carlo_fpr(1.0, 64, &cfg, 10, 11).is_err());
    }

    #[test]
    fn fpr_csv_header() {
        let rows = vec![FprRow {
            m: 1,
            trials: 10,
            rejections: 1,
            rate: 0.1,
            bound: 2.0,
        }];
        let mut out = Vec::new();
        fpr_to_csv(&rows, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "m,trials,rejections,rate,bound\n1,10,1,0.1,2\n"
        );
    }
}
