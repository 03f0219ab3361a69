//! Descriptive statistics behind the dataset table, the lemma chart and the
//! density plots, plus the balanced annotation sampler.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::AnalysisError;
use crate::extraction::{ConstructionRecord, Label};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LabelStats {
    pub count: usize,
    /// Mean source-sentence word count; `None` when `count == 0`.
    pub mean_length: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DatasetSummary {
    pub explicit: LabelStats,
    pub implicit: LabelStats,
}

pub fn dataset_summary(constructions: &[ConstructionRecord]) -> DatasetSummary {
    let stats = |label: Label| {
        let lengths: Vec<usize> = constructions
            .iter()
            .filter(|c| c.label == label)
            .map(|c| c.sentence_length)
            .collect();
        LabelStats {
            count: lengths.len(),
            mean_length: (!lengths.is_empty())
                .then(|| lengths.iter().sum::<usize>() as f64 / lengths.len() as f64),
        }
    };
    DatasetSummary {
        explicit: stats(Label::Explicit),
        implicit: stats(Label::Implicit),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaShare {
    pub lemma: String,
    pub total: usize,
    pub explicit: usize,
    pub implicit: usize,
    /// `total` over all constructions.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaDistribution {
    /// At most `top_k` lemmas, by descending count then alphabetically.
    pub lemmas: Vec<LemmaShare>,
    pub distinct_lemmas: usize,
    pub total: usize,
    /// Combined share of the returned lemmas.
    pub top_k_share: f64,
}

pub fn lemma_distribution(
    constructions: &[ConstructionRecord],
    top_k: usize,
) -> Result<LemmaDistribution, AnalysisError> {
    if top_k == 0 {
        return Err(AnalysisError::InvalidTopK);
    }
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for c in constructions {
        let entry = counts.entry(c.main_verb_lemma.as_str()).or_default();
        match c.label {
            Label::Explicit => entry.0 += 1,
            Label::Implicit => entry.1 += 1,
        }
    }
    let total = constructions.len();
    let mut lemmas: Vec<LemmaShare> = counts
        .into_iter()
        .map(|(lemma, (explicit, implicit))| LemmaShare {
            lemma: String::from(lemma),
            total: explicit + implicit,
            explicit,
            implicit,
            share: (explicit + implicit) as f64 / total as f64,
        })
        .collect();
    // BTreeMap order is alphabetical; a stable sort keeps it for ties
    lemmas.sort_by(|a, b| b.total.cmp(&a.total));
    let distinct_lemmas = lemmas.len();
    lemmas.truncate(top_k);
    let top_k_share = lemmas.iter().map(|l| l.total).sum::<usize>() as f64 / total.max(1) as f64;
    Ok(LemmaDistribution {
        lemmas,
        distinct_lemmas,
        total,
        top_k_share,
    })
}

/// Sample Pearson correlation.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(AnalysisError::TooFewValues { needed: 2, got: n });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalysisError::ZeroVariance);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdeCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl KdeCurve {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| (xs[1] - xs[0]) * (ys[0] + ys[1]) * 0.5)
        .sum()
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0))
}

/// Scott's rule, `σ̂ · n^(-1/5)` with the sample standard deviation.
pub fn scott_bandwidth(values: &[f64]) -> Result<f64, AnalysisError> {
    if values.len() < 2 {
        return Err(AnalysisError::TooFewValues {
            needed: 2,
            got: values.len(),
        });
    }
    let h = sample_std(values) * libm::pow(values.len() as f64, -0.2);
    if h > 0.0 && h.is_finite() {
        Ok(h)
    } else {
        Err(AnalysisError::DegenerateBandwidth)
    }
}

/// Evenly spaced grid covering the data ± 3 bandwidths.
pub fn default_grid(values: &[f64], bandwidth: f64, points: usize) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * bandwidth;
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * bandwidth;
    let points = points.max(2);
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Gaussian kernel density estimate on `grid`; Scott's rule when no
/// bandwidth is given.
pub fn kde(values: &[f64], grid: &[f64], bandwidth: Option<f64>) -> Result<KdeCurve, AnalysisError> {
    if values.len() < 2 {
        return Err(AnalysisError::TooFewValues {
            needed: 2,
            got: values.len(),
        });
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(_) => return Err(AnalysisError::InvalidBandwidth),
        None => scott_bandwidth(values)?,
    };
    let norm = INV_SQRT_2PI / (values.len() as f64 * h);
    let density = grid
        .iter()
        .map(|x| {
            values
                .iter()
                .map(|v| {
                    let u = (x - v) / h;
                    libm::exp(-0.5 * u * u)
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    Ok(KdeCurve {
        grid: grid.to_vec(),
        density,
        bandwidth: h,
    })
}

/// Balanced random sample: `n / 2` constructions of each label, drawn
/// without replacement and reproducible under `seed`.
pub fn annotation_sample(
    constructions: &[ConstructionRecord],
    n: usize,
    seed: u64,
) -> Result<Vec<ConstructionRecord>, AnalysisError> {
    if !n.is_multiple_of(2) {
        return Err(AnalysisError::OddSampleSize(n));
    }
    let half = n / 2;
    let pick = |label| -> Vec<&ConstructionRecord> {
        constructions.iter().filter(|c| c.label == label).collect()
    };
    let mut explicit = pick(Label::Explicit);
    let mut implicit = pick(Label::Implicit);
    if explicit.len() < half || implicit.len() < half {
        return Err(AnalysisError::InsufficientClass {
            requested: n,
            explicit: explicit.len(),
            implicit: implicit.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    explicit.shuffle(&mut rng);
    implicit.shuffle(&mut rng);
    let mut sample: Vec<ConstructionRecord> = explicit[..half]
        .iter()
        .chain(&implicit[..half])
        .map(|c| (*c).clone())
        .collect();
    sample.shuffle(&mut rng);
    Ok(sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;

    fn construction(id: usize, label: Label, lemma: &str, len: usize) -> ConstructionRecord {
        ConstructionRecord {
            sentence_id: format!("s{id}"),
            label,
            main_verb_index: 1,
            main_verb_lemma: lemma.to_string(),
            sconj_index: (label == Label::Explicit).then_some(2),
            sc_onset_index: if label == Label::Explicit { 3 } else { 2 },
            sc_end_index: 4,
            sc_subject_index: None,
            sentence_length: len,
        }
    }

    #[test]
    fn summary_means() {
        let cs = vec![
            construction(0, Label::Explicit, "think", 10),
            construction(1, Label::Explicit, "say", 20),
            construction(2, Label::Implicit, "think", 12),
        ];
        let s = dataset_summary(&cs);
        assert_eq!(s.explicit, LabelStats { count: 2, mean_length: Some(15.0) });
        assert_eq!(s.implicit, LabelStats { count: 1, mean_length: Some(12.0) });
        let empty = dataset_summary(&[]);
        assert_eq!(empty.explicit.count, 0);
        assert_eq!(empty.explicit.mean_length, None);
    }

    #[test]
    fn lemma_shares() {
        let cs: Vec<_> = ["think", "think", "say", "think"]
            .iter()
            .enumerate()
            .map(|(i, l)| construction(i, Label::Implicit, l, 5))
            .collect();
        let d = lemma_distribution(&cs, 10).unwrap();
        assert_eq!(d.lemmas.len(), 2);
        assert_eq!(d.lemmas[0].lemma, "think");
        assert_eq!(d.lemmas[0].share, 0.75);
        assert_eq!(d.lemmas[1].share, 0.25);
        assert_eq!(d.top_k_share, 1.0);
        let top1 = lemma_distribution(&cs, 1).unwrap();
        assert_eq!(top1.lemmas.len(), 1);
        assert_eq!(top1.distinct_lemmas, 2);
        assert_eq!(top1.top_k_share, 0.75);
        assert_eq!(lemma_distribution(&cs, 0), Err(AnalysisError::InvalidTopK));
    }

    #[test]
    fn lemma_ties_alphabetical() {
        let cs: Vec<_> = ["say", "know", "say", "know", "agree"]
            .iter()
            .enumerate()
            .map(|(i, l)| construction(i, Label::Explicit, l, 5))
            .collect();
        let d = lemma_distribution(&cs, 5).unwrap();
        let order: Vec<_> = d.lemmas.iter().map(|l| l.lemma.as_str()).collect();
        assert_eq!(order, vec!["know", "say", "agree"]);
    }

    #[test]
    fn pearson_perfect_lines() {
        let x = [1.0, 2.0, 3.5, 7.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert!((pearson_r(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_r(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson_r(&x, &[1.0; 4]), Err(AnalysisError::ZeroVariance));
        assert_eq!(pearson_r(&x, &[1.0]), Err(AnalysisError::LengthMismatch(4, 1)));
    }

    #[test]
    fn kde_two_point_closed_form() {
        let curve = kde(&[-1.0, 1.0], &[0.0], Some(1.0)).unwrap();
        let phi1 = INV_SQRT_2PI * libm::exp(-0.5);
        assert!((curve.density[0] - phi1).abs() < 1e-15);
        assert!((curve.density[0] - 0.24197).abs() < 1e-5);
    }

    #[test]
    fn kde_symmetric_and_normalized() {
        let values = [-0.3, 0.0, 0.3, -0.1, 0.1];
        let grid: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.01).collect();
        let curve = kde(&values, &grid, None).unwrap();
        for i in 0..grid.len() {
            let j = grid.len() - 1 - i;
            assert!((curve.density[i] - curve.density[j]).abs() < 1e-12);
        }
        let wide = default_grid(&values, curve.bandwidth, 512);
        let c2 = kde(&values, &wide, Some(curve.bandwidth)).unwrap();
        assert!((c2.integral() - 1.0).abs() < 0.01);
    }

    #[test]
    fn kde_rejects_degenerate() {
        assert_eq!(kde(&[2.0, 2.0], &[0.0], None), Err(AnalysisError::DegenerateBandwidth));
        assert_eq!(kde(&[1.0, 2.0], &[0.0], Some(0.0)), Err(AnalysisError::InvalidBandwidth));
        assert!(kde(&[2.0, 2.0], &[0.0], Some(0.5)).is_ok());
    }

    #[test]
    fn sample_is_balanced_and_seeded() {
        let cs: Vec<_> = (0..20)
            .map(|i| {
                let label = if i % 2 == 0 { Label::Explicit } else { Label::Implicit };
                construction(i, label, "think", 7)
            })
            .collect();
        let a = annotation_sample(&cs, 4, 7).unwrap();
        let b = annotation_sample(&cs, 4, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().filter(|c| c.label == Label::Explicit).count(), 2);
        assert_eq!(annotation_sample(&cs, 3, 7), Err(AnalysisError::OddSampleSize(3)));
    }

    #[test]
    fn sample_needs_enough_of_each_class() {
        let mut cs: Vec<_> = (0..3).map(|i| construction(i, Label::Explicit, "say", 5)).collect();
        cs.extend((3..503).map(|i| construction(i, Label::Implicit, "say", 5)));
        assert_eq!(
            annotation_sample(&cs, 10, 1),
            Err(AnalysisError::InsufficientClass { requested: 10, explicit: 3, implicit: 500 })
        );
    }
}
