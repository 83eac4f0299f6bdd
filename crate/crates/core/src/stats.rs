//! Entropy-normalized statistics: adjusted complexity `KA`, the ratio `R`,
//! and the deficiency, in unconditional, conditional and mutual forms.
//!
//! For a word of length `n` with empirical entropy `H` and effective
//! description length `K`:
//!
//! ```text
//! baseline   = n * H
//! KA         = K / H
//! R          = K / (n * H)
//! deficiency = n * H - K
//! ```

use serde::{Serialize, Serializer};

use crate::bits::BitWord;
use crate::coders::{CoderId, LengthMode};
use crate::combinatorics::Factorization;
use crate::elias;
use crate::entropy::{conditional_entropy, mutual_information_emp, PairCounts, SymbolCounts};
use crate::error::{Error, Result};

/// Mutual information below this is treated as zero.
pub const MUTUAL_FLOOR: f64 = 1e-6;

/// Rounds to 6 significant digits for serialization.
pub fn sig6(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.5e}").parse().unwrap_or(v)
}

pub(crate) fn ser_sig6<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(sig6(*v))
}

pub(crate) fn ser_opt_sig6<S: Serializer>(
    v: &Option<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_f64(sig6(*v)),
        None => s.serialize_none(),
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjustedReport {
    pub n: u64,
    pub w: u64,
    #[serde(serialize_with = "ser_sig6")]
    pub H: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub baseline: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub k_eff: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub KA: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub R: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub deficiency: f64,
    pub coder: String,
}

impl AdjustedReport {
    /// Report for an externally supplied description length.
    pub fn from_length(word: &BitWord, k_eff: f64, coder: impl Into<String>) -> Result<Self> {
        let counts = SymbolCounts::of(word);
        if word.is_constant() {
            return Err(Error::ConstantWord);
        }
        let h = counts.entropy();
        let n = counts.n();
        let baseline = n as f64 * h;
        Ok(Self {
            n,
            w: counts.n1,
            H: h,
            baseline,
            k_eff,
            KA: k_eff / h,
            R: k_eff / baseline,
            deficiency: baseline - k_eff,
            coder: coder.into(),
        })
    }
}

/// Statistics under the ideal lengths of `coder`.
pub fn adjusted(word: &BitWord, coder: CoderId) -> Result<AdjustedReport> {
    adjusted_with_mode(word, coder, LengthMode::Ideal)
}

pub fn adjusted_with_mode(
    word: &BitWord,
    coder: CoderId,
    mode: LengthMode,
) -> Result<AdjustedReport> {
    if word.is_constant() {
        return Err(Error::ConstantWord);
    }
    let k_eff = coder.code(word).len(mode);
    AdjustedReport::from_length(word, k_eff, coder.to_string())
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalReport {
    pub n: u64,
    #[serde(serialize_with = "ser_sig6")]
    pub H_cond: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub baseline: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub k_eff_cond: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub KA_cond: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub R_cond: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub deficiency_cond: f64,
    pub coder: String,
}

/// Conditional description length of `x` given `y`: the coordinates are split
/// by the value of `y` and each class of `x` is coded separately. With the
/// shell coder this is the two-class shell code, costing
/// `log2 C(n_b, k_b) + log2(n_b + 1)` per nonempty class.
pub fn conditional_code_len(
    x: &BitWord,
    y: &BitWord,
    coder: CoderId,
    mode: LengthMode,
) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let mut total = 0.0;
    for b in [0u8, 1] {
        let class: Vec<u8> = x
            .bits()
            .iter()
            .zip(y.bits())
            .filter(|&(_, &yb)| yb == b)
            .map(|(&xb, _)| xb)
            .collect();
        if class.is_empty() {
            continue;
        }
        total += coder.code(&BitWord::new(class)?).len(mode);
    }
    Ok(total)
}

pub fn adjusted_conditional(x: &BitWord, y: &BitWord, coder: CoderId) -> Result<ConditionalReport> {
    adjusted_conditional_with_mode(x, y, coder, LengthMode::Ideal)
}

pub fn adjusted_conditional_with_mode(
    x: &BitWord,
    y: &BitWord,
    coder: CoderId,
    mode: LengthMode,
) -> Result<ConditionalReport> {
    let pc = PairCounts::of(x, y)?;
    let h = conditional_entropy(&pc);
    if h <= 0.0 {
        return Err(Error::ZeroConditionalEntropy);
    }
    let n = pc.n();
    let baseline = n as f64 * h;
    let k = conditional_code_len(x, y, coder, mode)?;
    Ok(ConditionalReport {
        n,
        H_cond: h,
        baseline,
        k_eff_cond: k,
        KA_cond: k / h,
        R_cond: k / baseline,
        deficiency_cond: baseline - k,
        coder: coder.to_string(),
    })
}

/// Length of the pair `(x, y)` coded as one four-cell shell: the multinomial
/// over aligned-pair counts plus headers for three counts (the fourth follows
/// from `n`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLength {
    pub ideal_len: f64,
    pub concrete_len: u64,
}

impl JointLength {
    pub fn len(&self, mode: LengthMode) -> f64 {
        match mode {
            LengthMode::Ideal => self.ideal_len,
            LengthMode::Concrete => self.concrete_len as f64,
        }
    }
}

pub fn joint_pair_shell_len(pc: &PairCounts) -> JointLength {
    let fac = Factorization::multinomial(&pc.cells());
    let header = 3.0 * (pc.n() as f64 + 1.0).log2();
    JointLength {
        ideal_len: fac.log2() + header,
        concrete_len: elias::len(pc.c00 + 1)
            + elias::len(pc.c01 + 1)
            + elias::len(pc.c10 + 1)
            + fac.ceil_log2(),
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutualReport {
    pub n: u64,
    #[serde(serialize_with = "ser_sig6")]
    pub I_emp: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub I_eff: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub KA_mutual: f64,
    #[serde(serialize_with = "ser_sig6")]
    pub R_mutual: f64,
    /// Set when the surrogate mutual information came out negative.
    pub negative_I_eff: bool,
    pub coder: String,
}

pub fn adjusted_mutual(x: &BitWord, y: &BitWord, coder: CoderId) -> Result<MutualReport> {
    adjusted_mutual_with_mode(x, y, coder, LengthMode::Ideal)
}

pub fn adjusted_mutual_with_mode(
    x: &BitWord,
    y: &BitWord,
    coder: CoderId,
    mode: LengthMode,
) -> Result<MutualReport> {
    let pc = PairCounts::of(x, y)?;
    let i_emp = mutual_information_emp(&pc);
    if i_emp < MUTUAL_FLOOR {
        return Err(Error::ZeroMutualBaseline(i_emp));
    }
    let n = pc.n();
    let i_eff =
        coder.code(x).len(mode) + coder.code(y).len(mode) - joint_pair_shell_len(&pc).len(mode);
    Ok(MutualReport {
        n,
        I_emp: i_emp,
        I_eff: i_eff,
        KA_mutual: i_eff / i_emp,
        R_mutual: i_eff / (n as f64 * i_emp),
        negative_I_eff: i_eff < 0.0,
        coder: coder.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SECTION6: &str = "01010001001000001010000100000100001";

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    /// `y` built so that `(x, y)` has the aligned counts (19, 7, 6, 3).
    fn table_one_pair() -> (BitWord, BitWord) {
        let x = w(SECTION6);
        let (mut ones_seen, mut zeros_seen) = (0, 0);
        let y: Vec<u8> = x
            .bits()
            .iter()
            .map(|&b| {
                if b == 1 {
                    ones_seen += 1;
                    u8::from(ones_seen <= 3)
                } else {
                    zeros_seen += 1;
                    u8::from(zeros_seen <= 7)
                }
            })
            .collect();
        (x, BitWord::new(y).unwrap())
    }

    #[test]
    fn section6_ratios() {
        let x = w(SECTION6);
        let lit = adjusted(&x, CoderId::Literal).unwrap();
        assert_eq!(lit.w, 9);
        assert!((lit.R - 1.216).abs() < 0.01);
        assert!((lit.baseline - 28.79).abs() < 0.1);
        let comb = adjusted(&x, CoderId::Shell).unwrap();
        assert!((comb.R - 1.085).abs() < 0.02);
    }

    #[test]
    fn scale_identities() {
        let x = w(SECTION6);
        for coder in CoderId::model_members()
            .into_iter()
            .chain([CoderId::ModelClass])
        {
            for mode in [LengthMode::Ideal, LengthMode::Concrete] {
                let r = adjusted_with_mode(&x, coder, mode).unwrap();
                assert!((r.KA - r.n as f64 * r.R).abs() < 1e-9);
                assert!((r.deficiency - r.baseline * (1.0 - r.R)).abs() < 1e-9);
                assert!((r.baseline - r.n as f64 * r.H).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn alternating_is_structured() {
        let alt = BitWord::alternating(1000).unwrap();
        let r = adjusted(&alt, CoderId::ModelClass).unwrap();
        assert!(r.R <= 0.02, "R = {}", r.R);
    }

    #[test]
    fn constant_word_is_rejected() {
        assert!(matches!(
            adjusted(&BitWord::zeros(12).unwrap(), CoderId::Shell),
            Err(Error::ConstantWord)
        ));
    }

    #[test]
    fn table_one_conditional() {
        let (x, y) = table_one_pair();
        assert_eq!(
            PairCounts::of(&x, &y).unwrap(),
            PairCounts::new(19, 7, 6, 3)
        );
        let r = adjusted_conditional(&x, &y, CoderId::Shell).unwrap();
        assert!((r.H_cond - 0.820).abs() < 0.005);
        assert!((r.R_cond - 1.10).abs() < 0.05, "R_cond = {}", r.R_cond);
        let expected = (177_100f64).log2() + 26f64.log2() + 120f64.log2() + 11f64.log2();
        assert!((r.k_eff_cond - expected).abs() < 1e-9);
    }

    #[test]
    fn conditional_errors() {
        let x = w(SECTION6);
        assert!(matches!(
            adjusted_conditional(&x, &x, CoderId::Shell),
            Err(Error::ZeroConditionalEntropy)
        ));
        assert!(matches!(
            adjusted_conditional(&x, &w("0101"), CoderId::Shell),
            Err(Error::LengthMismatch(35, 4))
        ));
    }

    #[test]
    fn constant_side_information_reduces_to_unconditional() {
        let x = w(SECTION6);
        let y = BitWord::ones(35).unwrap();
        let c = adjusted_conditional(&x, &y, CoderId::Shell).unwrap();
        let u = adjusted(&x, CoderId::Shell).unwrap();
        assert!((c.R_cond - u.R).abs() < 1e-12);
    }

    #[test]
    fn mutual_of_identical_balanced_words() {
        let x: BitWord = "0110100110010110".repeat(4).parse().unwrap();
        let r = adjusted_mutual(&x, &x, CoderId::Shell).unwrap();
        assert!((r.I_emp - 1.0).abs() < 1e-12);
        assert!(
            (0.8..=1.2).contains(&r.R_mutual),
            "R_mutual = {}",
            r.R_mutual
        );
    }

    #[test]
    fn mutual_table_one() {
        let (x, y) = table_one_pair();
        let r = adjusted_mutual(&x, &y, CoderId::Shell).unwrap();
        assert!((r.I_emp - 0.0027).abs() < 0.0005);
        assert!((r.R_mutual - r.I_eff / (35.0 * r.I_emp)).abs() < 1e-9);
    }

    #[test]
    fn mutual_zero_baseline() {
        // counts (1,1,1,1): independent
        let x = w("0011");
        let y = w("0101");
        assert!(matches!(
            adjusted_mutual(&x, &y, CoderId::Shell),
            Err(Error::ZeroMutualBaseline(_))
        ));
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(1.085432244995), 1.08543);
        assert_eq!(sig6(28784.1479), 28784.1);
        assert_eq!(sig6(-0.000123456789), -0.000123457);
        assert_eq!(sig6(0.0), 0.0);
        let x = w(SECTION6);
        let json = serde_json::to_value(adjusted(&x, CoderId::Shell).unwrap()).unwrap();
        let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 9);
        assert_eq!(json["R"], serde_json::json!(1.08543));
        assert_eq!(json["coder"], "shell");
    }
}
