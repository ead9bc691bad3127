//! Daubechies wavelet filters, the nondecimated wavelet transform,
//! autocorrelation wavelets and their inner-product matrix.
//!
//! Scales are numbered from 1 (finest) to `J` (coarsest). Every per-scale
//! collection in this module is stored with scale `j` at index `j - 1`.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of scales a discrete wavelet set may be built for.
pub const MAX_LEVELS: usize = 20;

/// Condition number above which the inner-product matrix is rejected.
pub const MAX_CONDITION: f64 = 1e10;

// Extremal-phase (minimum-phase) Daubechies low-pass filters, obtained by
// spectral factorisation at 60 significant digits and rounded to f64.
// Normalised so the taps sum to sqrt(2).
const DAUB_1: [f64; 2] = [
    0.7071067811865476,
    0.7071067811865476,
];

const DAUB_2: [f64; 4] = [
    0.48296291314453416,
    0.8365163037378079,
    0.2241438680420134,
    -0.12940952255126037,
];

const DAUB_3: [f64; 6] = [
    0.33267055295008263,
    0.8068915093110925,
    0.45987750211849154,
    -0.13501102001025458,
    -0.08544127388202666,
    0.03522629188570953,
];

const DAUB_4: [f64; 8] = [
    0.2303778133088965,
    0.7148465705529157,
    0.6308807679298589,
    -0.027983769416859854,
    -0.18703481171909309,
    0.030841381835560764,
    0.0328830116668852,
    -0.010597401785069032,
];

const DAUB_5: [f64; 10] = [
    0.16010239797419293,
    0.6038292697971896,
    0.7243085284377729,
    0.13842814590132074,
    -0.24229488706638203,
    -0.032244869584638375,
    0.07757149384004572,
    -0.006241490212798274,
    -0.012580751999081999,
    0.0033357252854737712,
];

const DAUB_6: [f64; 12] = [
    0.11154074335010947,
    0.49462389039845306,
    0.7511339080210954,
    0.31525035170919763,
    -0.22626469396543983,
    -0.12976686756726194,
    0.09750160558732304,
    0.027522865530305727,
    -0.03158203931748603,
    0.0005538422011614961,
    0.004777257510945511,
    -0.0010773010853084796,
];

const DAUB_7: [f64; 14] = [
    0.07785205408500918,
    0.3965393194819173,
    0.7291320908462351,
    0.4697822874051931,
    -0.14390600392856498,
    -0.22403618499387498,
    0.07130921926683026,
    0.08061260915108308,
    -0.03802993693501441,
    -0.01657454163066688,
    0.01255099855609984,
    0.0004295779729213665,
    -0.0018016407040474908,
    0.00035371379997452024,
];

const DAUB_8: [f64; 16] = [
    0.05441584224310401,
    0.31287159091429995,
    0.6756307362972898,
    0.5853546836542067,
    -0.015829105256349306,
    -0.2840155429615469,
    0.0004724845739132828,
    0.12874742662047847,
    -0.017369301001807547,
    -0.044088253930794755,
    0.013981027917398282,
    0.008746094047405777,
    -0.004870352993451574,
    -0.00039174037337694705,
    0.0006754494064505693,
    -0.00011747678412476953,
];

const DAUB_9: [f64; 18] = [
    0.038077947363878345,
    0.24383467461259034,
    0.6048231236901112,
    0.6572880780513005,
    0.13319738582500756,
    -0.2932737832791749,
    -0.09684078322297646,
    0.14854074933810638,
    0.03072568147933338,
    -0.06763282906132997,
    0.00025094711483145197,
    0.022361662123679096,
    -0.004723204757751397,
    -0.00428150368246343,
    0.0018476468830562265,
    0.00023038576352319597,
    -0.0002519631889427101,
    3.93473203162716e-05,
];

const DAUB_10: [f64; 20] = [
    0.026670057900555554,
    0.1881768000776915,
    0.5272011889317256,
    0.6884590394536035,
    0.2811723436605775,
    -0.24984642432731538,
    -0.19594627437737705,
    0.12736934033579325,
    0.09305736460357235,
    -0.07139414716639708,
    -0.029457536821875813,
    0.033212674059341,
    0.0036065535669561697,
    -0.010733175483330575,
    0.001395351747052901,
    0.001992405295185056,
    -0.0006858566949597116,
    -0.00011646685512928545,
    9.358867032006959e-05,
    -1.3264202894521244e-05,
];

/// Compactly supported orthonormal wavelet family.
///
/// `Haar` and `DaubechiesExtremalPhase(1)` denote the same wavelet and
/// compare equal.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum WaveletFamily {
    Haar,
    DaubechiesExtremalPhase(u8),
}

impl WaveletFamily {
    pub fn vanishing_moments(&self) -> usize {
        match *self {
            WaveletFamily::Haar => 1,
            WaveletFamily::DaubechiesExtremalPhase(n) => n as usize,
        }
    }

    /// Low-pass (scaling) filter taps.
    pub fn low_pass(&self) -> Result<&'static [f64]> {
        Ok(match self.vanishing_moments() {
            1 => &DAUB_1,
            2 => &DAUB_2,
            3 => &DAUB_3,
            4 => &DAUB_4,
            5 => &DAUB_5,
            6 => &DAUB_6,
            7 => &DAUB_7,
            8 => &DAUB_8,
            9 => &DAUB_9,
            10 => &DAUB_10,
            n => {
                return Err(Error::Config(format!(
                    "Daubechies extremal-phase wavelets support 1..=10 vanishing moments, got {n}"
                )))
            }
        })
    }

    /// High-pass (wavelet) filter taps, `g[k] = (-1)^k h[L-1-k]`.
    pub fn high_pass(&self) -> Result<Vec<f64>> {
        let h = self.low_pass()?;
        let len = h.len();
        Ok((0..len)
            .map(|k| if k % 2 == 0 { h[len - 1 - k] } else { -h[len - 1 - k] })
            .collect())
    }

    pub fn filter_len(&self) -> usize {
        2 * self.vanishing_moments()
    }

    /// Support length of the scale-`j` discrete wavelet: `(2^j - 1)(L - 1) + 1`.
    pub fn support_len(&self, scale: usize) -> usize {
        ((1usize << scale) - 1) * (self.filter_len() - 1) + 1
    }
}

impl PartialEq for WaveletFamily {
    fn eq(&self, other: &Self) -> bool {
        self.vanishing_moments() == other.vanishing_moments()
    }
}

impl Eq for WaveletFamily {}

impl Hash for WaveletFamily {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.vanishing_moments().hash(state);
    }
}

impl Default for WaveletFamily {
    fn default() -> Self {
        WaveletFamily::Haar
    }
}

impl fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.vanishing_moments() {
            1 => write!(f, "haar"),
            n => write!(f, "db{n}"),
        }
    }
}

impl FromStr for WaveletFamily {
    type Err = Error;

    /// Accepts `haar` or `db<N>` / `daub<N>` (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "haar" {
            return Ok(WaveletFamily::Haar);
        }
        let digits = lower
            .strip_prefix("db")
            .or_else(|| lower.strip_prefix("daub"))
            .ok_or_else(|| Error::Config(format!("unknown wavelet family '{s}'")))?;
        let n: u8 = digits
            .parse()
            .map_err(|_| Error::Config(format!("unknown wavelet family '{s}'")))?;
        let family = if n == 1 {
            WaveletFamily::Haar
        } else {
            WaveletFamily::DaubechiesExtremalPhase(n)
        };
        family.low_pass()?;
        Ok(family)
    }
}

/// `floor(log2 n)`, the default (and maximal) number of scales for a
/// series of length `n`.
pub fn max_levels(n: usize) -> usize {
    if n < 2 {
        0
    } else {
        (usize::BITS - 1 - n.leading_zeros()) as usize
    }
}

fn check_levels(levels: usize) -> Result<()> {
    if levels == 0 || levels > MAX_LEVELS {
        return Err(Error::argument(format!(
            "number of scales must lie in 1..={MAX_LEVELS}, got {levels}"
        )));
    }
    Ok(())
}

/// The discrete nondecimated wavelets `psi_{j,0}` for scales `1..=J`.
#[derive(Debug, Clone)]
pub struct DiscreteWaveletSet {
    family: WaveletFamily,
    vectors: Vec<Vec<f64>>,
}

impl DiscreteWaveletSet {
    /// Builds the scale vectors by the cascade algorithm: scale `j + 1` is
    /// the high-pass filter upsampled by `2^j` applied to the level-`j`
    /// scaling sequence.
    pub fn build(family: WaveletFamily, levels: usize) -> Result<Self> {
        check_levels(levels)?;
        let h = family.low_pass()?;
        let g = family.high_pass()?;
        let mut vectors = Vec::with_capacity(levels);
        vectors.push(g.clone());
        let mut phi = h.to_vec();
        for j in 1..levels {
            let step = 1usize << j;
            let out_len = phi.len() + step * (h.len() - 1);
            let mut psi = vec![0.0; out_len];
            let mut next_phi = vec![0.0; out_len];
            for (k, (&gk, &hk)) in g.iter().zip(h).enumerate() {
                let offset = step * k;
                for (n, &p) in phi.iter().enumerate() {
                    psi[offset + n] += gk * p;
                    next_phi[offset + n] += hk * p;
                }
            }
            vectors.push(psi);
            phi = next_phi;
        }
        Ok(Self { family, vectors })
    }

    pub fn family(&self) -> WaveletFamily {
        self.family
    }

    pub fn levels(&self) -> usize {
        self.vectors.len()
    }

    /// `psi_{j,0}` for `scale` in `1..=J`.
    pub fn vector(&self, scale: usize) -> &[f64] {
        &self.vectors[scale - 1]
    }
}

/// Autocorrelation wavelets `Psi_j(tau) = sum_k psi_{j,0}(k) psi_{j,0}(k + tau)`.
#[derive(Debug, Clone)]
pub struct AcWaveletTable {
    family: WaveletFamily,
    // values[j - 1][tau] for tau = 0..=max_lag(j); symmetric in tau.
    values: Vec<Vec<f64>>,
}

impl AcWaveletTable {
    pub fn build(family: WaveletFamily, levels: usize) -> Result<Self> {
        Ok(Self::from_wavelets(&DiscreteWaveletSet::build(family, levels)?))
    }

    pub fn from_wavelets(set: &DiscreteWaveletSet) -> Self {
        let values = set
            .vectors
            .iter()
            .map(|psi| {
                (0..psi.len())
                    .map(|tau| psi[..psi.len() - tau].iter().zip(&psi[tau..]).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect();
        Self {
            family: set.family,
            values,
        }
    }

    pub fn family(&self) -> WaveletFamily {
        self.family
    }

    pub fn levels(&self) -> usize {
        self.values.len()
    }

    /// Largest lag with a (potentially) nonzero value at `scale`.
    pub fn max_lag(&self, scale: usize) -> usize {
        self.values[scale - 1].len() - 1
    }

    /// Largest lag supported by any scale.
    pub fn support_bound(&self) -> usize {
        self.values.iter().map(|v| v.len() - 1).max().unwrap_or(0)
    }

    /// `Psi_j(tau)`, zero outside the support.
    pub fn get(&self, scale: usize, tau: i64) -> f64 {
        let row = &self.values[scale - 1];
        row.get(tau.unsigned_abs() as usize).copied().unwrap_or(0.0)
    }

    /// Nonnegative-lag values of scale `j`.
    pub fn row(&self, scale: usize) -> &[f64] {
        &self.values[scale - 1]
    }
}

/// Gram matrix `A_{j,l} = sum_tau Psi_j(tau) Psi_l(tau)` and its inverse.
#[derive(Debug, Clone)]
pub struct InnerProductMatrix {
    entries: DMatrix<f64>,
    inverse: DMatrix<f64>,
    condition: f64,
}

impl InnerProductMatrix {
    pub fn from_table(table: &AcWaveletTable) -> Result<Self> {
        let levels = table.levels();
        let mut entries = DMatrix::zeros(levels, levels);
        for j in 1..=levels {
            for l in j..=levels {
                let (a, b) = (table.row(j), table.row(l));
                let n = a.len().min(b.len());
                // tau = 0 once, +/- tau twice
                let sum = a[0] * b[0] + 2.0 * (1..n).map(|tau| a[tau] * b[tau]).sum::<f64>();
                entries[(j - 1, l - 1)] = sum;
                entries[(l - 1, j - 1)] = sum;
            }
        }
        let eig = SymmetricEigen::new(entries.clone());
        let min = eig.eigenvalues.min();
        let max = eig.eigenvalues.max();
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned { levels, condition });
        }
        let inverse = symmetric_inverse(&entries).ok_or(Error::IllConditioned { levels, condition })?;
        Ok(Self {
            entries,
            inverse,
            condition,
        })
    }

    pub fn levels(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }
}

/// Inverse of a symmetric positive-definite matrix through its Cholesky
/// factor, falling back to pivoted LU for indefinite input.
fn symmetric_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    match m.clone().cholesky() {
        Some(chol) => Some(chol.inverse()),
        None => m.clone().full_piv_lu().try_inverse(),
    }
}

/// Everything spectral estimation needs for one `(family, J)` pair.
#[derive(Debug, Clone)]
pub struct LswBasis {
    wavelets: DiscreteWaveletSet,
    table: AcWaveletTable,
    a: InnerProductMatrix,
}

impl LswBasis {
    pub fn new(family: WaveletFamily, levels: usize) -> Result<Self> {
        let wavelets = DiscreteWaveletSet::build(family, levels)?;
        let table = AcWaveletTable::from_wavelets(&wavelets);
        let a = InnerProductMatrix::from_table(&table)?;
        Ok(Self { wavelets, table, a })
    }

    pub fn family(&self) -> WaveletFamily {
        self.wavelets.family()
    }

    pub fn levels(&self) -> usize {
        self.wavelets.levels()
    }

    pub fn wavelets(&self) -> &DiscreteWaveletSet {
        &self.wavelets
    }

    pub fn table(&self) -> &AcWaveletTable {
        &self.table
    }

    pub fn inner_product(&self) -> &InnerProductMatrix {
        &self.a
    }
}

/// Nondecimated wavelet coefficients `d_{j,k} = sum_t X_t psi_{j,0}(t - k)`
/// for `k = 0..T-1`, rows ordered finest scale first.
///
/// A non-dyadic series is first extended by mirror reflection to the next
/// power of two; the transform wraps periodically on the (padded) series and
/// rows are truncated back to the original length.
pub fn ndwt(series: &[f64], family: WaveletFamily, levels: usize) -> Result<Vec<Vec<f64>>> {
    let n = series.len();
    check_levels(levels)?;
    if levels > max_levels(n) {
        return Err(Error::argument(format!(
            "J = {levels} exceeds floor(log2 T) = {} for T = {n}",
            max_levels(n)
        )));
    }
    let padded_len = n.next_power_of_two();
    let padded: Vec<f64> = (0..padded_len).map(|i| series[mirror_index(i as i64, n)]).collect();
    let mut rows = circular_ndwt(&padded, family, levels)?;
    for row in &mut rows {
        row.truncate(n);
    }
    Ok(rows)
}

/// Index into a length-`n` series under half-sample symmetric extension
/// (`x_{-1} = x_0`, `x_n = x_{n-1}`), periodic with period `2n`.
pub(crate) fn mirror_index(i: i64, n: usize) -> usize {
    let period = 2 * n as i64;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// Periodic nondecimated transform over the full circle of `signal` by the
/// a-trous algorithm; any length is accepted.
pub(crate) fn circular_ndwt(signal: &[f64], family: WaveletFamily, levels: usize) -> Result<Vec<Vec<f64>>> {
    let h = family.low_pass()?;
    let g = family.high_pass()?;
    let n = signal.len();
    let mut smooth = signal.to_vec();
    let mut rows = Vec::with_capacity(levels);
    for j in 0..levels {
        let step = (1usize << j) % n.max(1);
        let mut detail = vec![0.0; n];
        let mut next = vec![0.0; n];
        for k in 0..n {
            let (mut d, mut c) = (0.0, 0.0);
            let mut idx = k;
            for (&gl, &hl) in g.iter().zip(h) {
                let v = smooth[idx];
                d += gl * v;
                c += hl * v;
                idx += step;
                if idx >= n {
                    idx -= n;
                }
            }
            detail[k] = d;
            next[k] = c;
        }
        rows.push(detail);
        smooth = next;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn all_families() -> Vec<WaveletFamily> {
        std::iter::once(WaveletFamily::Haar)
            .chain((2..=10).map(WaveletFamily::DaubechiesExtremalPhase))
            .collect()
    }

    // Direct convolution of two finite sequences, used as an independent
    // check on the cascade.
    fn convolve_upsampled(filter: &[f64], step: usize, seq: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; seq.len() + step * (filter.len() - 1)];
        for n in 0..out.len() {
            for (k, f) in filter.iter().enumerate() {
                if n >= step * k && n - step * k < seq.len() {
                    out[n] += f * seq[n - step * k];
                }
            }
        }
        out
    }

    #[test]
    fn haar_is_daubechies_one() {
        assert_eq!(WaveletFamily::Haar, WaveletFamily::DaubechiesExtremalPhase(1));
        assert_eq!(
            WaveletFamily::Haar.low_pass().unwrap(),
            WaveletFamily::DaubechiesExtremalPhase(1).low_pass().unwrap()
        );
    }

    #[test]
    fn low_pass_sums_to_sqrt2_and_is_orthonormal() {
        for fam in all_families() {
            let h = fam.low_pass().unwrap();
            assert!((h.iter().sum::<f64>() - 2f64.sqrt()).abs() < 1e-12, "{fam}");
            for shift in (0..h.len()).step_by(2) {
                let dot: f64 = h[..h.len() - shift].iter().zip(&h[shift..]).map(|(a, b)| a * b).sum();
                let want = if shift == 0 { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-13, "{fam} shift {shift}: {dot}");
            }
        }
    }

    #[test]
    fn unsupported_vanishing_moments() {
        assert!(matches!(
            DiscreteWaveletSet::build(WaveletFamily::DaubechiesExtremalPhase(11), 3),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            DiscreteWaveletSet::build(WaveletFamily::DaubechiesExtremalPhase(0), 3),
            Err(Error::Config(_))
        ));
        assert!(DiscreteWaveletSet::build(WaveletFamily::Haar, 0).is_err());
        assert!(DiscreteWaveletSet::build(WaveletFamily::Haar, 21).is_err());
    }

    #[test]
    fn parses_family_names() {
        assert_eq!("Haar".parse::<WaveletFamily>().unwrap(), WaveletFamily::Haar);
        assert_eq!(
            "db4".parse::<WaveletFamily>().unwrap(),
            WaveletFamily::DaubechiesExtremalPhase(4)
        );
        assert_eq!("daub1".parse::<WaveletFamily>().unwrap(), WaveletFamily::Haar);
        assert!("db11".parse::<WaveletFamily>().is_err());
        assert!("morlet".parse::<WaveletFamily>().is_err());
        assert_eq!(WaveletFamily::DaubechiesExtremalPhase(3).to_string(), "db3");
    }

    #[test]
    fn haar_scale_one_and_two() {
        let set = DiscreteWaveletSet::build(WaveletFamily::Haar, 2).unwrap();
        assert_eq!(set.vector(1), &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]);
        // one cascade step by direct convolution: g upsampled by 2, then h
        let h = WaveletFamily::Haar.low_pass().unwrap();
        let g = WaveletFamily::Haar.high_pass().unwrap();
        let oracle = convolve_upsampled(&g, 2, h);
        for (got, want) in set.vector(2).iter().zip(&oracle) {
            assert!((got - want).abs() < 1e-15);
        }
        for (got, want) in set.vector(2).iter().zip([0.5, 0.5, -0.5, -0.5]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn scale_vectors_unit_norm_with_expected_support() {
        for fam in all_families() {
            let set = DiscreteWaveletSet::build(fam, 6).unwrap();
            for j in 1..=6 {
                let v = set.vector(j);
                assert_eq!(v.len(), fam.support_len(j));
                let norm: f64 = v.iter().map(|x| x * x).sum();
                assert!((norm - 1.0).abs() < 1e-10, "{fam} scale {j}: {norm}");
            }
        }
    }

    #[test]
    fn haar_autocorrelation_values() {
        let table = AcWaveletTable::build(WaveletFamily::Haar, 2).unwrap();
        assert!((table.get(1, 0) - 1.0).abs() < 1e-15);
        assert!((table.get(1, 1) + 0.5).abs() < 1e-15);
        assert!((table.get(1, -1) + 0.5).abs() < 1e-15);
        assert_eq!(table.get(1, 2), 0.0);
        assert!((table.get(2, 0) - 1.0).abs() < 1e-15);
        assert!((table.get(2, 1) - 0.25).abs() < 1e-15);
        assert!((table.get(2, 2) + 0.5).abs() < 1e-15);
        assert!((table.get(2, -2) + 0.5).abs() < 1e-15);
        assert!((table.get(2, 3) + 0.25).abs() < 1e-15);
        assert!((table.get(2, -3) + 0.25).abs() < 1e-15);
        assert_eq!(table.get(2, 4), 0.0);
    }

    #[test]
    fn autocorrelation_wavelets_are_normalised_and_symmetric() {
        for fam in all_families() {
            let table = AcWaveletTable::build(fam, 5).unwrap();
            for j in 1..=5 {
                assert!((table.get(j, 0) - 1.0).abs() < 1e-10);
                let bound = table.max_lag(j) as i64;
                assert_eq!(bound as usize, fam.support_len(j) - 1);
                for tau in 1..=bound + 3 {
                    assert_eq!(table.get(j, tau), table.get(j, -tau));
                }
                assert_eq!(table.get(j, bound + 1), 0.0);
            }
        }
    }

    #[test]
    fn haar_a_matrix_first_entry() {
        let table = AcWaveletTable::build(WaveletFamily::Haar, 1).unwrap();
        let a = InnerProductMatrix::from_table(&table).unwrap();
        assert!((a.entries()[(0, 0)] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn a_matrix_positive_definite_and_inverse_accurate() {
        for fam in all_families() {
            for levels in 1..=10 {
                let table = AcWaveletTable::build(fam, levels).unwrap();
                let a = match InnerProductMatrix::from_table(&table) {
                    Ok(a) => a,
                    Err(Error::IllConditioned { condition, .. }) => {
                        panic!("{fam} J={levels} condition {condition}")
                    }
                    Err(e) => panic!("{e}"),
                };
                let m = a.entries();
                let eig = SymmetricEigen::new(m.clone());
                assert!(eig.eigenvalues.min() > 0.0);
                for j in 0..levels {
                    for l in 0..levels {
                        assert_eq!(m[(j, l)], m[(l, j)]);
                    }
                }
                let prod = m * a.inverse();
                let err = (prod - DMatrix::<f64>::identity(levels, levels)).abs().max();
                assert!(err < 1e-8, "{fam} J={levels} err {err}");
            }
        }
    }

    #[test]
    fn ndwt_rejects_too_many_levels() {
        let x = vec![0.0; 100];
        assert!(matches!(ndwt(&x, WaveletFamily::Haar, 7), Err(Error::Argument(_))));
        assert!(ndwt(&x, WaveletFamily::Haar, 6).is_ok());
    }

    #[test]
    fn ndwt_zero_series() {
        let rows = ndwt(&[0.0; 64], WaveletFamily::DaubechiesExtremalPhase(4), 6).unwrap();
        assert!(rows.iter().flatten().all(|&d| d == 0.0));
    }

    #[test]
    fn ndwt_impulse_haar() {
        let mut x = vec![0.0; 16];
        x[0] = 1.0;
        let rows = ndwt(&x, WaveletFamily::Haar, 1).unwrap();
        // d_{1,k} = psi(-k): k = 0 takes psi(0), k = T-1 wraps onto psi(1)
        let mut want = vec![0.0; 16];
        want[0] = FRAC_1_SQRT_2;
        want[15] = -FRAC_1_SQRT_2;
        for (got, w) in rows[0].iter().zip(&want) {
            assert!((got - w).abs() < 1e-15);
        }
    }

    #[test]
    fn ndwt_matched_wavelet_gives_unit_coefficient() {
        let mut x = vec![0.0; 32];
        x[5] = FRAC_1_SQRT_2;
        x[6] = -FRAC_1_SQRT_2;
        let rows = ndwt(&x, WaveletFamily::Haar, 3).unwrap();
        assert!((rows[0][5] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn circular_transform_handles_wrapping_supports() {
        // support at scale 3 of db4 (50 taps) exceeds the 16-point circle
        let x: Vec<f64> = (0..16).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let fam = WaveletFamily::DaubechiesExtremalPhase(4);
        let rows = circular_ndwt(&x, fam, 3).unwrap();
        let set = DiscreteWaveletSet::build(fam, 3).unwrap();
        for j in 1..=3 {
            for k in 0..16 {
                let want: f64 = set
                    .vector(j)
                    .iter()
                    .enumerate()
                    .map(|(n, p)| p * x[(k + n) % 16])
                    .sum();
                assert!((rows[j - 1][k] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mirror_extension() {
        let idx: Vec<usize> = (-3..9).map(|i| mirror_index(i, 3)).collect();
        assert_eq!(idx, vec![2, 1, 0, 0, 1, 2, 2, 1, 0, 0, 1, 2]);
        assert_eq!(max_levels(128), 7);
        assert_eq!(max_levels(127), 6);
        assert_eq!(max_levels(350), 8);
    }
}
