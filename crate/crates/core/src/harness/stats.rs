//! Descriptive statistics and two-group tests.
//!
//! The t and F tail probabilities go through the regularised incomplete
//! beta function, evaluated with Lentz's continued fraction.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} samples per group, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    /// No variation at all. The neutral result is carried along so callers
    /// can still report it.
    #[error("degenerate input: no variation within or between groups")]
    DegenerateInput(TestResult),
}

/// A test statistic with its degrees of freedom and p-value. For t-tests
/// `df2` is unused and zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub df: f64,
    pub df2: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Descriptives {
    pub n: usize,
    pub mean: f64,
    /// Sample SD with Bessel's correction; `None` below two samples.
    pub sd: Option<f64>,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Mean and sample SD. The mean of an empty slice is NaN.
pub fn descriptives(xs: &[f64]) -> Descriptives {
    Descriptives {
        n: xs.len(),
        mean: mean(xs),
        sd: (xs.len() >= 2).then(|| sample_variance(xs).sqrt()),
    }
}

fn check_sizes(groups: &[&[f64]]) -> Result<(), StatsError> {
    match groups.iter().map(|g| g.len()).min() {
        Some(n) if n < 2 => Err(StatsError::TooFewSamples { needed: 2, got: n }),
        None => Err(StatsError::TooFewSamples { needed: 2, got: 0 }),
        _ => Ok(()),
    }
}

const NEUTRAL_T: TestResult = TestResult {
    statistic: 0.0,
    df: 0.0,
    df2: 0.0,
    p: 1.0,
};

fn t_result(diff: f64, se: f64, df: f64) -> Result<TestResult, StatsError> {
    if se == 0.0 {
        if diff == 0.0 {
            return Err(StatsError::DegenerateInput(TestResult { df, ..NEUTRAL_T }));
        }
        return Ok(TestResult {
            statistic: diff.signum() * f64::INFINITY,
            df,
            df2: 0.0,
            p: 0.0,
        });
    }
    let t = diff / se;
    Ok(TestResult {
        statistic: t,
        df,
        df2: 0.0,
        p: t_two_sided_p(t, df),
    })
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite df.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    check_sizes(&[a, b])?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_variance(a) / na, sample_variance(b) / nb);
    let se2 = va + vb;
    let df = if se2 == 0.0 {
        na + nb - 2.0
    } else {
        se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0))
    };
    t_result(mean(a) - mean(b), se2.sqrt(), df)
}

/// Student's t-test with pooled variance.
pub fn student_t(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    check_sizes(&[a, b])?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = na + nb - 2.0;
    let pooled = ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / df;
    t_result(mean(a) - mean(b), (pooled * (1.0 / na + 1.0 / nb)).sqrt(), df)
}

/// One-way ANOVA F test across `groups`.
pub fn one_way_anova(groups: &[&[f64]]) -> Result<TestResult, StatsError> {
    check_sizes(groups)?;
    let k = groups.len() as f64;
    let n: f64 = groups.iter().map(|g| g.len() as f64).sum();
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n;
    let between: f64 = groups
        .iter()
        .map(|g| g.len() as f64 * (mean(g) - grand).powi(2))
        .sum();
    let within: f64 = groups
        .iter()
        .map(|g| {
            let m = mean(g);
            g.iter().map(|x| (x - m).powi(2)).sum::<f64>()
        })
        .sum();
    let (df1, df2) = (k - 1.0, n - k);
    if within == 0.0 {
        if between == 0.0 {
            return Err(StatsError::DegenerateInput(TestResult {
                statistic: 0.0,
                df: df1,
                df2,
                p: 1.0,
            }));
        }
        return Ok(TestResult {
            statistic: f64::INFINITY,
            df: df1,
            df2,
            p: 0.0,
        });
    }
    let f = (between / df1) / (within / df2);
    Ok(TestResult {
        statistic: f,
        df: df1,
        df2,
        p: f_sf(f, df1, df2),
    })
}

/// Levene's test for equal variances, mean-centred: ANOVA on the absolute
/// deviations from each group mean.
pub fn levene_test(groups: &[&[f64]]) -> Result<TestResult, StatsError> {
    check_sizes(groups)?;
    let deviations: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let m = mean(g);
            g.iter().map(|x| (x - m).abs()).collect()
        })
        .collect();
    let refs: Vec<&[f64]> = deviations.iter().map(Vec::as_slice).collect();
    one_way_anova(&refs)
}

pub fn eta_squared(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 1.0;
    }
    t * t / (t * t + df)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Student,
    Welch,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Self::Student => "student",
            Self::Welch => "welch",
        }
    }
}

/// Levene-gated comparison of two groups. Both t-tests are kept; the
/// selected one feeds eta squared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub levene: TestResult,
    pub student: TestResult,
    pub welch: TestResult,
    pub selected: Variant,
    pub eta_squared: f64,
    pub degenerate: bool,
}

impl Comparison {
    pub fn chosen(&self) -> TestResult {
        match self.selected {
            Variant::Student => self.student,
            Variant::Welch => self.welch,
        }
    }
}

pub fn compare(a: &[f64], b: &[f64]) -> Result<Comparison, StatsError> {
    let mut degenerate = false;
    let mut unpack = |r: Result<TestResult, StatsError>| match r {
        Ok(t) => Ok(t),
        Err(StatsError::DegenerateInput(t)) => {
            degenerate = true;
            Ok(t)
        }
        Err(e) => Err(e),
    };
    let levene = unpack(levene_test(&[a, b]))?;
    let student = unpack(student_t(a, b))?;
    let welch = unpack(welch_t(a, b))?;
    let selected = if levene.p < 0.05 {
        Variant::Welch
    } else {
        Variant::Student
    };
    let chosen = match selected {
        Variant::Student => student,
        Variant::Welch => welch,
    };
    Ok(Comparison {
        levene,
        student,
        welch,
        selected,
        eta_squared: eta_squared(chosen.statistic, chosen.df),
        degenerate,
    })
}

/// Lag-1 autocorrelation of a series (biased estimator, as used for
/// correlograms). Zero for a constant series.
pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let denom: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    if denom == 0.0 {
        return 0.0;
    }
    xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / denom
}

/// Two-sided p-value of a t statistic.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5).clamp(0.0, 1.0)
}

/// Upper tail probability of the F distribution.
pub fn f_sf(f: f64, df1: f64, df2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    regularized_incomplete_beta(df2 / (df2 + df1 * f), df2 / 2.0, df1 / 2.0).clamp(0.0, 1.0)
}

/// Natural log of the gamma function (Lanczos, g = 7, nine terms).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
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
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// I_x(a, b).
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
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
