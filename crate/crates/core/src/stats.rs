//! Paired t-tests with Bonferroni correction, and descriptive corpus
//! statistics (quote coverage, quote position, trends across elections).
//!
//! The Student-t tail comes from the regularized incomplete beta function,
//! evaluated by a continued fraction. No statistics crate is involved.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{Article, Debate};
use crate::error::{Error, Result};
use crate::quotematch::{QuoteIndex, QuoteMatch};

/// Size of the default feature battery; Bonferroni multiplies by this.
pub const DEFAULT_BATTERY_SIZE: usize = 20;

/// Adjusted-p thresholds for one, two, three and four arrows.
pub const TIERS: [f64; 4] = [0.05, 0.01, 0.001, 0.0001];

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + 7.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b). `y` must equal 1 − x; passing it
/// separately avoids cancellation when x is close to 1.
fn beta_reg(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * y.ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, y) / b
    }
}

/// Upper tail P(T > t) of Student's t with `df` degrees of freedom.
pub fn student_t_sf(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return if t > 0.0 { 0.0 } else { 1.0 };
    }
    let t2 = t * t;
    let x = df / (df + t2);
    let y = t2 / (df + t2);
    let half_tail = 0.5 * beta_reg(df / 2.0, 0.5, x, y);
    if t > 0.0 {
        half_tail
    } else {
        1.0 - half_tail
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    /// Alternative: mean(a − b) > 0.
    Upper,
    /// Alternative: mean(a − b) < 0.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TTest {
    Computed { t: f64, p: f64, df: usize },
    /// Fewer than two pairs, or all differences identical.
    Degenerate,
}

fn mean_sd(d: &[f64]) -> (f64, f64) {
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let ss: f64 = d.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// One-sided paired t-test on d = a − b.
pub fn paired_t_one_sided(a: &[f64], b: &[f64], tail: Tail) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!("paired samples differ in length: {} vs {}", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Ok(TTest::Degenerate);
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (mean, sd) = mean_sd(&d);
    if sd == 0.0 || !sd.is_finite() {
        return Ok(TTest::Degenerate);
    }
    let n = d.len();
    let t = mean / (sd / (n as f64).sqrt());
    let upper = student_t_sf(t, (n - 1) as f64);
    let p = match tail {
        Tail::Upper => upper,
        Tail::Lower => 1.0 - upper,
    };
    Ok(TTest::Computed { t, p, df: n - 1 })
}

/// min(1, p·m) elementwise.
pub fn bonferroni(pvals: &[f64], m: usize) -> Result<Vec<f64>> {
    if m < pvals.len() {
        return Err(Error::InvalidInput(format!("m = {m} is smaller than the {} p-values", pvals.len())));
    }
    Ok(pvals.iter().map(|p| (p * m as f64).min(1.0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub feature: String,
    /// Absent for a degenerate test.
    pub t: Option<f64>,
    pub p_raw: f64,
    pub p_adjusted: f64,
    /// Whether highlights score higher (up) or lower (down).
    pub direction: Direction,
    /// Number of thresholds in [`TIERS`] the adjusted p falls below.
    pub tier: u8,
}

impl TestResult {
    pub fn significant(&self) -> bool {
        self.tier > 0
    }

    /// Arrow notation: one arrow per tier, empty when not significant.
    pub fn arrows(&self) -> String {
        let arrow = match self.direction {
            Direction::Up => "↑",
            Direction::Down => "↓",
            Direction::None => return String::new(),
        };
        arrow.repeat(self.tier as usize)
    }
}

pub fn tier(p_adjusted: f64) -> u8 {
    TIERS.iter().filter(|&&th| p_adjusted < th).count() as u8
}

/// Test each feature for a difference between highlights and their paired
/// non-highlights. The tail follows the sign of t, and `m` stays the full
/// battery size even when some tests are degenerate.
pub fn feature_battery(columns: &[(String, Vec<f64>, Vec<f64>)], m: usize) -> Result<Vec<TestResult>> {
    let m = m.max(columns.len());
    columns
        .iter()
        .map(|(name, highlight, other)| {
            let probe = paired_t_one_sided(highlight, other, Tail::Upper)?;
            let (t, p_raw, direction) = match probe {
                TTest::Degenerate => (None, 1.0, Direction::None),
                TTest::Computed { t, p, .. } if t >= 0.0 => (Some(t), p, Direction::Up),
                TTest::Computed { t, p, .. } => (Some(t), 1.0 - p, Direction::Down),
            };
            let p_adjusted = (p_raw * m as f64).min(1.0);
            let tier = tier(p_adjusted);
            Ok(TestResult {
                feature: name.clone(),
                t,
                p_raw,
                p_adjusted,
                direction: if tier > 0 { direction } else { Direction::None },
                tier,
            })
        })
        .collect()
}

pub fn write_battery_csv<W: Write>(results: &[TestResult], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::InvalidInput(e.to_string());
    out.write_record(["feature", "t", "p_raw", "p_adjusted", "direction", "tier", "arrows"])
        .map_err(err)?;
    for r in results {
        let dir = match r.direction {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::None => "none",
        };
        out.write_record([
            r.feature.clone(),
            r.t.map(|t| format!("{t:.6}")).unwrap_or_default(),
            format!("{:.6e}", r.p_raw),
            format!("{:.6e}", r.p_adjusted),
            dir.to_string(),
            r.tier.to_string(),
            r.arrows(),
        ])
        .map_err(err)?;
    }
    out.flush().map_err(|e| Error::io("battery report", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecileDistribution {
    pub fractions: [f64; 10],
    pub total_quotes: u64,
}

impl DecileDistribution {
    /// True when the debate has no quotes and the fractions are all zero.
    pub fn is_empty(&self) -> bool {
        self.total_quotes == 0
    }
}

/// Bucket sizes for `n` items split into 10 position deciles; the remainder
/// goes to the earliest buckets.
pub fn decile_sizes(n: usize) -> [usize; 10] {
    let mut sizes = [n / 10; 10];
    for s in sizes.iter_mut().take(n % 10) {
        *s += 1;
    }
    sizes
}

/// Fraction of the debate's quotes that fall in each decile of its turns.
pub fn quote_decile_distribution(debate: &Debate, index: &QuoteIndex) -> DecileDistribution {
    let totals = index.totals();
    let per_turn: Vec<u64> = debate
        .turns
        .iter()
        .map(|t| t.sentences.iter().map(|s| totals.get(s.id.as_str()).copied().unwrap_or(0)).sum())
        .collect();
    let mut counts = [0u64; 10];
    let mut turn = 0;
    for (bucket, size) in decile_sizes(per_turn.len()).iter().enumerate() {
        counts[bucket] = per_turn[turn..turn + size].iter().sum();
        turn += size;
    }
    let total: u64 = counts.iter().sum();
    let mut fractions = [0.0; 10];
    if total > 0 {
        for (f, c) in fractions.iter_mut().zip(counts) {
            *f = c as f64 / total as f64;
        }
    } else {
        log::warn!("debate {} has no quotes; decile distribution is all zero", debate.id);
    }
    DecileDistribution { fractions, total_quotes: total }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    /// Debate sentences quoted at least once.
    pub quoted_sentence_fraction: f64,
    /// Article tokens inside matched quotation spans.
    pub quote_text_fraction: f64,
}

pub fn coverage_fractions(debate: &Debate, articles: &[Article], index: &QuoteIndex, matches: &[QuoteMatch]) -> Coverage {
    let totals = index.totals();
    let n = debate.sentence_count();
    let quoted = debate
        .sentences()
        .filter(|s| totals.get(s.id.as_str()).copied().unwrap_or(0) >= 1)
        .count();
    let article_ids: HashSet<&str> = articles.iter().map(|a| a.id.as_str()).collect();
    let mut inside: HashMap<&str, HashSet<usize>> = HashMap::new();
    for m in matches.iter().filter(|m| article_ids.contains(m.article_id.as_str())) {
        inside.entry(m.article_id.as_str()).or_default().extend(m.span.0..m.span.1);
    }
    let article_tokens: usize = articles.iter().map(|a| a.tokens.len()).sum();
    let quoted_tokens: usize = inside.values().map(HashSet::len).sum();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Coverage {
        quoted_sentence_fraction: ratio(quoted, n),
        quote_text_fraction: ratio(quoted_tokens, article_tokens),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub slope: f64,
    pub intercept: f64,
    /// Two-sided p for a zero slope.
    pub p_value: f64,
    pub n: usize,
}

/// Ordinary least squares line with a t-test on the slope.
pub fn linear_trend(x: &[f64], y: &[f64]) -> Result<Trend> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("x and y differ in length".into()));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!("a trend needs at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("constant x: slope undefined".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let se = (sse / (nf - 2.0) / sxx).sqrt();
    let p_value = if se == 0.0 {
        if slope == 0.0 { 1.0 } else { 0.0 }
    } else {
        2.0 * student_t_sf((slope / se).abs(), nf - 2.0)
    };
    Ok(Trend { slope, intercept, p_value, n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearSummary {
    pub year: i32,
    pub n: usize,
    pub mean: f64,
    /// Standard error of the mean; 0 for a single point.
    pub se: f64,
}

/// Per-debate values grouped by election year.
pub fn aggregate_by_year(points: &[(i32, f64)]) -> Vec<YearSummary> {
    let mut by_year: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for &(year, v) in points {
        by_year.entry(year).or_default().push(v);
    }
    by_year
        .into_iter()
        .map(|(year, vs)| {
            let n = vs.len();
            let (mean, sd) = mean_sd(&vs);
            let se = if n > 1 { sd / (n as f64).sqrt() } else { 0.0 };
            YearSummary { year, n, mean, se }
        })
        .collect()
}
