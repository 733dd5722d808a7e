//! Discrete memoryless channels.

use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng::{rng_for, SimRng};
use crate::scalar::{within, Scalar};

/// Per-symbol transition law `W(y|x)`; rows are inputs, columns outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Dmc<T> {
    inputs: usize,
    outputs: usize,
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> Dmc<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let inputs = rows.len();
        if inputs == 0 {
            return Err(Error::Parameter("channel needs at least one input symbol".into()));
        }
        let outputs = rows[0].len();
        if outputs == 0 {
            return Err(Error::Parameter("channel needs at least one output symbol".into()));
        }
        let tol = T::row_sum_tolerance();
        for (x, row) in rows.iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::Parameter(format!("row {x} has {} entries, expected {outputs}", row.len())));
            }
            if row.iter().any(|w| *w < T::zero() || *w > T::one()) {
                return Err(Error::Parameter(format!("row {x} has an entry outside [0, 1]")));
            }
            let sum = row.iter().cloned().fold(T::zero(), |a, b| a + b);
            if !within(&sum, &T::one(), &tol) {
                return Err(Error::Parameter(format!("row {x} sums to {sum:?}, not 1")));
            }
        }
        Ok(Self { inputs, outputs, rows })
    }

    /// Noiseless `m`-ary channel.
    pub fn identity(m: usize) -> Result<Self> {
        let rows = (0..m).map(|x| (0..m).map(|y| if x == y { T::one() } else { T::zero() }).collect()).collect();
        Self::new(rows)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    /// `W(y|x)`; panics on out-of-range symbols.
    pub fn prob(&self, x: usize, y: usize) -> &T {
        &self.rows[x][y]
    }

    pub fn to_f64(&self) -> Dmc<f64> {
        Dmc {
            inputs: self.inputs,
            outputs: self.outputs,
            rows: self.rows.iter().map(|r| r.iter().map(Scalar::to_f64_lossy).collect()).collect(),
        }
    }

    pub(crate) fn check_input(&self, x: &[usize]) -> Result<()> {
        match x.iter().position(|&s| s >= self.inputs) {
            Some(i) => Err(Error::Input(format!(
                "input symbol {} at position {i} outside alphabet of size {}",
                x[i], self.inputs
            ))),
            None => Ok(()),
        }
    }

    pub(crate) fn check_output(&self, y: &[usize]) -> Result<()> {
        match y.iter().position(|&s| s >= self.outputs) {
            Some(i) => Err(Error::Input(format!(
                "output symbol {} at position {i} outside alphabet of size {}",
                y[i], self.outputs
            ))),
            None => Ok(()),
        }
    }
}

/// Binary symmetric channel parameters. The crossover is kept in `[0, 1/2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BscParams<T> {
    crossover: T,
}

impl<T: Scalar> BscParams<T> {
    pub fn new(crossover: T) -> Result<Self> {
        if crossover < T::zero() || crossover > T::half() {
            return Err(Error::Parameter(format!("BSC crossover {crossover:?} outside [0, 0.5]")));
        }
        Ok(Self { crossover })
    }

    pub fn crossover(&self) -> &T {
        &self.crossover
    }
}

pub fn make_bsc<T: Scalar>(params: &BscParams<T>) -> Dmc<T> {
    let p = params.crossover.clone();
    let q = T::one() - p.clone();
    Dmc { inputs: 2, outputs: 2, rows: vec![vec![q.clone(), p.clone()], vec![p, q]] }
}

/// One use of the `n`-fold channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelUse {
    pub input: Vec<usize>,
    pub output: Vec<usize>,
}

impl ChannelUse {
    pub fn new(input: Vec<usize>, output: Vec<usize>) -> Result<Self> {
        if input.len() != output.len() {
            return Err(Error::Input(format!(
                "input length {} differs from output length {}",
                input.len(),
                output.len()
            )));
        }
        Ok(Self { input, output })
    }

    pub fn blocklength(&self) -> usize {
        self.input.len()
    }
}

/// `W^n(y|x) = prod_i W(y_i|x_i)`.
pub fn product_prob<T: Scalar>(ch: &Dmc<T>, x: &[usize], y: &[usize]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::Input(format!("input length {} differs from output length {}", x.len(), y.len())));
    }
    ch.check_input(x)?;
    ch.check_output(y)?;
    Ok(x.iter().zip(y).fold(T::one(), |acc, (&xi, &yi)| acc * ch.rows[xi][yi].clone()))
}

/// Precomputed inverse-CDF tables for drawing channel outputs.
#[derive(Clone, Debug)]
pub struct Sampler {
    cumulative: Vec<Vec<f64>>,
}

impl Sampler {
    pub fn new<T: Scalar>(ch: &Dmc<T>) -> Self {
        let cumulative = ch
            .rows
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                row.iter()
                    .map(|w| {
                        acc += w.to_f64_lossy();
                        acc
                    })
                    .collect()
            })
            .collect();
        Self { cumulative }
    }

    pub fn inputs(&self) -> usize {
        self.cumulative.len()
    }

    pub fn sample_symbol<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let row = &self.cumulative[x];
        let u: f64 = rng.random();
        row.iter().position(|&c| u < c).unwrap_or(row.len() - 1)
    }

    /// Writes one noisy copy of `x` into `out`. Symbols must already be validated.
    pub fn sample_into<R: Rng + ?Sized>(&self, x: &[usize], rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        out.extend(x.iter().map(|&xi| self.sample_symbol(xi, rng)));
    }
}

/// Draws `y^n ~ W^n(.|x^n)`; identical output for identical seeds.
pub fn sample_output<T: Scalar>(ch: &Dmc<T>, x: &[usize], rng_seed: u64) -> Result<Vec<usize>> {
    ch.check_input(x)?;
    let mut rng: SimRng = rng_for(rng_seed, &[]);
    let mut out = Vec::with_capacity(x.len());
    Sampler::new(ch).sample_into(x, &mut rng, &mut out);
    Ok(out)
}

/// Binary entropy in bits.
pub fn binary_entropy<T: Float>(p: T) -> T {
    let term = |t: T| if t <= T::zero() { T::zero() } else { -t * t.log2() };
    term(p) + term(T::one() - p)
}

/// `1 - h2(p)` bits per use.
pub fn capacity_bsc<T: Scalar + Float>(params: &BscParams<T>) -> T {
    T::one() - binary_entropy(params.crossover)
}

/// Iteration cap of the alternating maximization.
pub const CAPACITY_MAX_ITERATIONS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityEstimate<T> {
    /// Mutual information of `input_distribution`, a lower bound on capacity.
    pub capacity: T,
    /// `max_x D(W(.|x) || q)`, an upper bound on capacity.
    pub upper_bound: T,
    pub input_distribution: Vec<T>,
    pub iterations: usize,
}

/// Capacity by alternating (Blahut-Arimoto) maximization of `I(X;Y)` over input laws.
///
/// Stops once the gap between the mutual-information lower bound and the divergence upper
/// bound is at most `tolerance`, so the returned capacity is within `tolerance` of the
/// maximum.
pub fn capacity_iterative<T: Scalar + Float>(ch: &Dmc<T>, tolerance: T) -> Result<CapacityEstimate<T>> {
    if !(tolerance > T::zero()) {
        return Err(Error::Parameter("capacity tolerance must be positive".into()));
    }
    let m = ch.inputs;
    let uniform = T::one() / T::from_usize(m).expect("alphabet size");
    let mut p = vec![uniform; m];
    let mut divergence = vec![T::zero(); m];
    let mut last = (T::zero(), T::infinity());

    for iteration in 1..=CAPACITY_MAX_ITERATIONS {
        let q: Vec<T> = (0..ch.outputs).map(|y| (0..m).fold(T::zero(), |acc, x| acc + p[x] * ch.rows[x][y])).collect();
        for (x, d) in divergence.iter_mut().enumerate() {
            *d = ch.rows[x]
                .iter()
                .zip(&q)
                .filter(|(w, _)| **w > T::zero())
                .fold(T::zero(), |acc, (&w, &qy)| acc + w * (w / qy).log2());
        }
        let lower = p.iter().zip(&divergence).fold(T::zero(), |acc, (&px, &d)| acc + px * d);
        let upper = divergence.iter().cloned().fold(T::neg_infinity(), T::max);
        last = (lower, upper);
        if upper - lower <= tolerance {
            let cap_limit = T::from_usize(m.min(ch.outputs)).expect("alphabet size").log2();
            return Ok(CapacityEstimate {
                capacity: lower.max(T::zero()).min(cap_limit),
                upper_bound: upper.max(T::zero()),
                input_distribution: p,
                iterations: iteration,
            });
        }
        // Multiplicative update p(x) <- p(x) 2^{D_x} / Z, shifted by the max for stability.
        let weights: Vec<T> = p.iter().zip(&divergence).map(|(&px, &d)| px * (d - upper).exp2()).collect();
        let z = weights.iter().cloned().fold(T::zero(), |a, b| a + b);
        for (px, w) in p.iter_mut().zip(weights) {
            *px = w / z;
        }
    }
    Err(Error::Convergence {
        iterations: CAPACITY_MAX_ITERATIONS,
        last_estimate: last.0.to_f64().unwrap_or(f64::NAN),
        gap: (last.1 - last.0).to_f64().unwrap_or(f64::NAN),
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DmcJson {
    inputs: usize,
    outputs: usize,
    rows: Vec<Vec<f64>>,
}

impl Serialize for Dmc<f64> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DmcJson { inputs: self.inputs, outputs: self.outputs, rows: self.rows.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dmc<f64> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = DmcJson::deserialize(d)?;
        if raw.rows.len() != raw.inputs {
            return Err(D::Error::custom(format!("declared {} inputs but {} rows given", raw.inputs, raw.rows.len())));
        }
        if raw.rows.iter().any(|r| r.len() != raw.outputs) {
            return Err(D::Error::custom(format!("every row must have {} entries", raw.outputs)));
        }
        Dmc::new(raw.rows).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn bsc(p: f64) -> Dmc<f64> {
        make_bsc(&BscParams::new(p).unwrap())
    }

    #[test]
    fn bsc_construction() {
        let ch = bsc(0.0);
        assert_eq!(ch.rows(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(bsc(0.5).rows().iter().flatten().all(|&w| w == 0.5));
        assert_eq!(bsc(0.1).rows(), &[vec![0.9, 0.1], vec![0.1, 0.9]]);
        assert!(BscParams::new(0.6).is_err());
        assert!(BscParams::new(-0.01).is_err());
    }

    #[test]
    fn rows_must_be_stochastic() {
        assert!(Dmc::new(vec![vec![0.5, 0.4]]).is_err());
        assert!(Dmc::new(vec![vec![1.2, -0.2]]).is_err());
        assert!(Dmc::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(Dmc::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn product_probabilities() {
        let ch = bsc(0.1);
        assert!((product_prob(&ch, &[0, 0, 0], &[0, 0, 0]).unwrap() - 0.729).abs() < 1e-15);
        assert!((product_prob(&ch, &[0, 0, 0], &[0, 1, 0]).unwrap() - 0.081).abs() < 1e-15);
        assert_eq!(product_prob(&ch, &[], &[]).unwrap(), 1.0);
        assert!(matches!(product_prob(&ch, &[0], &[0, 1]), Err(Error::Input(_))));
        assert!(matches!(product_prob(&ch, &[2], &[0]), Err(Error::Input(_))));
    }

    #[test]
    fn product_probabilities_exact() {
        let ch = make_bsc(&BscParams::new(Rational::ratio(1, 10)).unwrap());
        assert_eq!(product_prob(&ch, &[0, 0, 0], &[0, 1, 0]).unwrap(), Rational::ratio(81, 1000));
    }

    #[test]
    fn sampling_is_deterministic() {
        let ch = bsc(0.3);
        let x = vec![0, 1, 1, 0, 1, 0, 0, 0, 1, 1];
        assert_eq!(sample_output(&ch, &x, 42).unwrap(), sample_output(&ch, &x, 42).unwrap());
        assert_eq!(sample_output(&bsc(0.0), &x, 9).unwrap(), x);
        assert!(sample_output(&ch, &[3], 1).is_err());
    }

    #[test]
    fn closed_form_capacity() {
        assert_eq!(capacity_bsc(&BscParams::new(0.0).unwrap()), 1.0);
        assert_eq!(capacity_bsc(&BscParams::new(0.5).unwrap()), 0.0);
    }

    #[test]
    fn iterative_capacity_special_channels() {
        for m in 1..=5 {
            let est = capacity_iterative(&Dmc::<f64>::identity(m).unwrap(), 1e-9).unwrap();
            assert!((est.capacity - (m as f64).log2()).abs() < 1e-9);
            assert!(est.input_distribution.iter().all(|&p| (p - 1.0 / m as f64).abs() < 1e-9));
        }
        let flat = Dmc::new(vec![vec![0.2, 0.3, 0.5]; 3]).unwrap();
        assert!(capacity_iterative(&flat, 1e-9).unwrap().capacity.abs() < 1e-12);
        assert!(capacity_iterative(&flat, 0.0).is_err());
    }

    #[test]
    fn iterative_capacity_asymmetric_channel() {
        // Z-channel with p = 0.5 has capacity log2(5/4).
        let z = Dmc::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let est = capacity_iterative(&z, 1e-10).unwrap();
        assert!((est.capacity - (1.25f64).log2()).abs() < 1e-9);
        assert!((est.input_distribution[1] - 0.4).abs() < 1e-4);
    }

    #[test]
    fn iterative_capacity_in_f32() {
        let ch = make_bsc(&BscParams::new(0.1f32).unwrap());
        let est = capacity_iterative(&ch, 1e-5).unwrap();
        assert!((est.capacity - capacity_bsc(&BscParams::new(0.1f32).unwrap())).abs() < 1e-5);
    }

    #[test]
    fn json_shape() {
        let ch = bsc(0.25);
        let text = serde_json::to_string(&ch).unwrap();
        assert_eq!(text, r#"{"inputs":2,"outputs":2,"rows":[[0.75,0.25],[0.25,0.75]]}"#);
        let back: Dmc<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ch);
        assert!(serde_json::from_str::<Dmc<f64>>(r#"{"inputs":2,"outputs":2,"rows":[[1.0,0.0]]}"#).is_err());
        assert!(serde_json::from_str::<Dmc<f64>>(r#"{"inputs":1,"outputs":1,"rows":[[1.0]],"x":1}"#).is_err());
    }
}
