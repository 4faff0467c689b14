//! Charts of the toric model: one per maximal simplicial cone, with the
//! cone's rays as coordinate basis.

use super::smooth::{mu, soft_min, HermitianModel};
use crate::degeneration::{DegenerationSpec, RhoModel};
use crate::error::{Error, Result};
use crate::fan_pl::{to_q, Cone};
use crate::qmat::{coords_in, dot, Q};
use crate::scalar::Real;

/// Which log coordinate to use for `a_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Convention {
    /// `eta - log||s_m||^2` with the saturating model norm.
    #[default]
    Shifted,
    /// The raw `-log|s_m|^2`.
    Unshifted,
}

/// A stratum of the central fibre as seen from a chart: the cone, the rays
/// of its star (cones one dimension up) and its own rays.
#[derive(Clone, Debug, PartialEq)]
pub struct StratumData {
    pub cone: Cone,
    pub dim: usize,
    /// Indices of rays `m` not in the cone with `cone + m` a cone of the fan.
    pub star: Vec<usize>,
    /// Indices of the cone's own rays.
    pub own: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Chart<T> {
    pub index: usize,
    pub rank: usize,
    /// Indices into the spec's rays of the basis `S_sigma`, ascending.
    pub basis: Vec<usize>,
    /// Coordinates of every ray in the basis.
    pub coords: Vec<Vec<T>>,
    pub coords_q: Vec<Vec<Q>>,
    /// Weights normalized to vanish on the basis.
    pub wprime: Vec<T>,
    pub wprime_q: Vec<Q>,
    pub eta: T,
    pub rho: RhoModel,
    pub model: HermitianModel<T>,
    pub strata: Vec<StratumData>,
    /// Basis ray sets of all charts of the spec, for the domain test.
    pub all_bases: Vec<Vec<usize>>,
}

/// A point of a chart: raw coordinates `a_j = -log|z_j|^2` and `tau`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint<T> {
    pub chart: usize,
    pub a: Vec<T>,
    pub theta: Vec<T>,
    pub tau: T,
}

impl<T: Real> ChartPoint<T> {
    pub fn new(chart: usize, a: Vec<T>, tau: T) -> Self {
        let theta = vec![T::zero(); a.len()];
        ChartPoint { chart, a, theta, tau }
    }
}

pub(crate) fn strata_of(spec: &DegenerationSpec) -> Vec<StratumData> {
    let cones = spec.fan().all_cones();
    cones
        .iter()
        .map(|c| {
            let own: Vec<usize> =
                (0..spec.rays().len()).filter(|&i| c.rays().contains(&spec.rays()[i])).collect();
            let star: Vec<usize> = (0..spec.rays().len())
                .filter(|&i| !own.contains(&i))
                .filter(|&i| {
                    cones.iter().any(|d| {
                        d.rank() == c.rank() + 1
                            && d.rays().contains(&spec.rays()[i])
                            && c.rays().iter().all(|r| d.rays().contains(r))
                    })
                })
                .collect();
            StratumData { cone: c.clone(), dim: c.rank(), star, own }
        })
        .collect()
}

fn basis_of(spec: &DegenerationSpec, c: &Cone) -> Vec<usize> {
    let mut b: Vec<usize> =
        c.rays().iter().map(|r| spec.rays().iter().position(|x| x == r).expect("fan ray")).collect();
    b.sort_unstable();
    b
}

impl<T: Real> Chart<T> {
    pub fn new(spec: &DegenerationSpec, index: usize) -> Result<Self> {
        let cone = spec
            .fan()
            .maximal()
            .get(index)
            .ok_or_else(|| Error::InvalidParameter(format!("no maximal cone {index}")))?;
        if !cone.is_simplicial() {
            return Err(Error::NotSimplicial);
        }
        let basis = basis_of(spec, cone);
        let bq: Vec<Vec<Q>> = basis.iter().map(|&i| to_q(&spec.rays()[i])).collect();
        let l = &spec.weight().pieces[index];
        let coords_q: Vec<Vec<Q>> =
            spec.rays().iter().map(|r| coords_in(&bq, &to_q(r)).expect("full rank basis")).collect();
        let wprime_q: Vec<Q> =
            spec.rays().iter().zip(spec.weights()).map(|(r, w)| w - dot(l, &to_q(r))).collect();
        let all_bases = spec.fan().maximal().iter().map(|c| basis_of(spec, c)).collect();
        Ok(Chart {
            index,
            rank: spec.rank(),
            basis,
            coords: coords_q.iter().map(|v| v.iter().map(T::from_rational).collect()).collect(),
            coords_q,
            wprime: wprime_q.iter().map(T::from_rational).collect(),
            wprime_q,
            eta: T::c(spec.eta),
            rho: spec.rho,
            model: HermitianModel::default(),
            strata: strata_of(spec),
            all_bases,
        })
    }

    /// All charts of a simplicial spec.
    pub fn all(spec: &DegenerationSpec) -> Result<Vec<Self>> {
        (0..spec.fan().maximal().len()).map(|i| Chart::new(spec, i)).collect()
    }

    pub fn nrays(&self) -> usize {
        self.coords.len()
    }

    pub fn is_basis(&self, m: usize) -> Option<usize> {
        self.basis.iter().position(|&b| b == m)
    }

    /// Raw `a_m = w'_m tau + sum_j m^j a_j` for every ray.
    pub fn raw_unchecked(&self, a: &[T], tau: T) -> Vec<T> {
        self.coords
            .iter()
            .zip(&self.wprime)
            .map(|(m, &w)| w * tau + m.iter().zip(a).map(|(&x, &y)| x * y).sum::<T>())
            .collect()
    }

    pub fn raw(&self, p: &ChartPoint<T>) -> Result<Vec<T>> {
        if p.a.len() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, found: p.a.len() });
        }
        let raw = self.raw_unchecked(&p.a, p.tau);
        if let Some((i, v)) = raw.iter().enumerate().find(|(_, v)| !(**v > T::zero())) {
            return Err(Error::OutsideChart { ray: i, value: v.f64() });
        }
        Ok(raw)
    }

    pub fn a_values(&self, p: &ChartPoint<T>, conv: Convention) -> Result<Vec<T>> {
        let raw = self.raw(p)?;
        Ok(self.convert(&raw, conv))
    }

    pub fn convert(&self, raw: &[T], conv: Convention) -> Vec<T> {
        match conv {
            Convention::Unshifted => raw.to_vec(),
            Convention::Shifted => raw.iter().map(|&r| self.model.shifted(self.eta, r)).collect(),
        }
    }

    /// `A_sigma = min_{m not in S_sigma} a_m` for chart `k` of the spec.
    pub fn domain_value(&self, raw: &[T], k: usize) -> T {
        let b = &self.all_bases[k];
        (0..raw.len()).filter(|i| !b.contains(i)).map(|i| raw[i]).fold(T::infinity(), T::min)
    }

    /// The chart owning a point: largest `A_sigma`, ties to the lowest index.
    pub fn owner(&self, raw: &[T]) -> usize {
        let mut best = 0;
        let mut val = self.domain_value(raw, 0);
        for k in 1..self.all_bases.len() {
            let v = self.domain_value(raw, k);
            if v > val {
                best = k;
                val = v;
            }
        }
        best
    }

    /// True iff `A_sigma >= A_sigma'` for every other chart.
    pub fn in_domain(&self, raw: &[T]) -> bool {
        let own = self.domain_value(raw, self.index);
        (0..self.all_bases.len()).all(|k| self.domain_value(raw, k) <= own)
    }

    /// Model potential factor `h_p` for stratum `s`, from shifted values.
    pub fn h_weight_from(&self, shifted: &[T], tau: T, s: usize) -> T {
        self.log_h_from(shifted, tau, s).exp()
    }

    pub fn log_h_from(&self, shifted: &[T], tau: T, s: usize) -> T {
        let st = &self.strata[s];
        let l = self.rank - st.dim;
        let exp = T::c(2.0) * (T::c(st.star.len() as f64) - T::c(l as f64));
        let two = T::c(2.0);
        exp * tau.ln()
            + st.star.iter().chain(&st.own).map(|&m| two * (self.eta.ln() - shifted[m].ln())).sum::<T>()
    }

    pub fn h_weight(&self, p: &ChartPoint<T>, s: usize) -> Result<T> {
        let a = self.a_values(p, Convention::Shifted)?;
        Ok(self.h_weight_from(&a, p.tau, s))
    }

    /// Unnormalized partition functions for every stratum.
    pub fn partition_tilde_from(&self, shifted: &[T], tau: T) -> Vec<T> {
        let eta = self.eta;
        let scale = (tau / (eta * eta)).ln();
        self.strata
            .iter()
            .map(|st| {
                let args: Vec<T> = st
                    .star
                    .iter()
                    .map(|&m| (shifted[m] / eta).ln())
                    .chain(st.own.iter().map(|&m| (tau / (shifted[m] * eta)).ln()))
                    .collect();
                soft_min(&args).map_or(T::zero(), |x| mu(x / scale))
            })
            .collect()
    }

    pub fn partition_from(&self, shifted: &[T], tau: T) -> Result<Vec<T>> {
        let t = self.partition_tilde_from(shifted, tau);
        let total: T = t.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::OutsidePartitionCover);
        }
        Ok(t.into_iter().map(|x| x / total).collect())
    }

    /// Normalized partition of unity `mu_p` over all strata.
    pub fn partition(&self, p: &ChartPoint<T>) -> Result<Vec<T>> {
        if !(p.tau > self.eta * self.eta) {
            return Err(Error::InvalidParameter("partition needs tau > eta^2".into()));
        }
        let a = self.a_values(p, Convention::Shifted)?;
        self.partition_from(&a, p.tau)
    }

    /// Index of the origin stratum.
    pub fn origin_stratum(&self) -> usize {
        self.strata.iter().position(|s| s.dim == 0).expect("origin present")
    }

    /// `log rho` of the bounded background factor.
    pub fn log_rho(&self, raw: &[T]) -> T {
        match self.rho {
            RhoModel::One => T::zero(),
            RhoModel::Fs => raw.iter().map(|&r| (-r).exp().ln_1p()).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q_int;

    fn rank_one() -> DegenerationSpec {
        DegenerationSpec::from_i64(&[&[1], &[-1]], &[q_int(0), q_int(1)]).unwrap()
    }

    fn example_one() -> DegenerationSpec {
        DegenerationSpec::from_i64(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]], &[q_int(0), q_int(1), q_int(0), q_int(1)])
            .unwrap()
    }

    fn chart_with_basis(spec: &DegenerationSpec, rays: &[&[i64]]) -> Chart<f64> {
        Chart::all(spec)
            .unwrap()
            .into_iter()
            .find(|c| rays.iter().all(|r| c.basis.iter().any(|&b| spec.rays()[b].to_i64() == r.to_vec())))
            .unwrap()
    }

    #[test]
    fn a_values_examples() {
        let s = rank_one();
        let c = chart_with_basis(&s, &[&[1]]);
        let a = c.a_values(&ChartPoint::new(c.index, vec![20.0], 100.0), Convention::Unshifted).unwrap();
        assert_eq!(a, vec![20.0, 80.0]);
        let s = example_one();
        let c = chart_with_basis(&s, &[&[1, 0], &[0, 1]]);
        let a = c.a_values(&ChartPoint::new(c.index, vec![10.0, 30.0], 100.0), Convention::Unshifted).unwrap();
        // rays in input order: (1,0), (-1,0), (0,1), (0,-1)
        assert_eq!(a, vec![10.0, 90.0, 30.0, 70.0]);
        // saturated norm
        let a = c.a_values(&ChartPoint::new(c.index, vec![0.5, 30.0], 100.0), Convention::Shifted).unwrap();
        assert_eq!(a[0], 10.0);
        assert!(matches!(
            c.a_values(&ChartPoint::new(c.index, vec![120.0, 30.0], 100.0), Convention::Unshifted),
            Err(Error::OutsideChart { ray: 1, .. })
        ));
    }

    #[test]
    fn strata_bookkeeping_rank_one() {
        let c = chart_with_basis(&rank_one(), &[&[1]]);
        assert_eq!(c.strata.len(), 3);
        let o = &c.strata[c.origin_stratum()];
        assert_eq!((o.star.clone(), o.own.clone()), (vec![0, 1], vec![]));
        let plus = c.strata.iter().find(|s| s.dim == 1 && s.own == vec![0]).unwrap();
        assert!(plus.star.is_empty());
    }

    #[test]
    fn h_weight_values() {
        let s = rank_one();
        let c = chart_with_basis(&s, &[&[1]]);
        let p = ChartPoint::new(c.index, vec![20.0 - 10.0], 100.0);
        // shifted values: eta + raw = 20 and 100
        let plus = c.strata.iter().position(|s| s.dim == 1 && s.own == vec![0]).unwrap();
        assert!((c.h_weight(&p, plus).unwrap() - 0.25).abs() < 1e-15);
        let o = c.origin_stratum();
        let want = 100f64.powi(2) * (10.0 / 20.0f64).powi(2) * (10.0 / 100.0f64).powi(2);
        assert!((c.h_weight(&p, o).unwrap() - want).abs() < 1e-12);
        // homogeneity: doubling every shifted value divides by 4 per factor
        let a = vec![40.0, 200.0];
        assert!((c.h_weight_from(&a, 100.0, o) - want / 16.0).abs() < 1e-12);
    }

    #[test]
    fn partition_sums_to_one_and_saturates() {
        let s = example_one();
        let c = chart_with_basis(&s, &[&[1, 0], &[0, 1]]);
        let tau = 1e4;
        for a in [[1.0, 1.0], [50.0, 3000.0], [4000.0, 4500.0], [300.0, 2.0]] {
            let m = c.partition(&ChartPoint::new(c.index, a.to_vec(), tau)).unwrap();
            assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(m.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
        // deep in the origin region every shifted value exceeds e tau / eta
        let m = c.partition(&ChartPoint::new(c.index, vec![4000.0, 4500.0], tau)).unwrap();
        assert_eq!(m[c.origin_stratum()], 1.0);
        // near the open part of the component: only the maximal stratum
        let m = c.partition(&ChartPoint::new(c.index, vec![1.0, 1.0], tau)).unwrap();
        let top = c.strata.iter().position(|st| st.own == c.basis).unwrap();
        assert_eq!(m[top], 1.0);
    }

    #[test]
    fn transition_shell_mixes() {
        let s = rank_one();
        let c = chart_with_basis(&s, &[&[1]]);
        let tau = 1e4;
        // shifted a_1 between eta and tau/eta: divisor stratum and origin overlap
        let m = c.partition(&ChartPoint::new(c.index, vec![90.0], tau)).unwrap();
        let o = c.origin_stratum();
        let plus = c.strata.iter().position(|s| s.dim == 1 && s.own == vec![0]).unwrap();
        assert!(m[o] > 0.0 && m[o] < 1.0 && m[plus] > 0.0 && m[plus] < 1.0);
        assert!((m[o] + m[plus] - 1.0).abs() < 1e-12);
    }
}
