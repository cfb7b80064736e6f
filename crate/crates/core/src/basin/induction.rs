use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::pusher::{pusher_margins, Pusher, PusherRequest};
use super::sequence::{check_star, unit_ball_samples, AutoSequence};
use crate::error::{Error, Result};
use crate::maps::HoloMap;
use crate::point::C2;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct InductionParams {
    /// Tolerance of the perturbed-contraction condition.
    pub delta: f64,
    /// `eps_j = 2^-j eps0`.
    pub eps0: f64,
    pub ball_samples: usize,
    pub seed: u64,
}

impl Default for InductionParams {
    fn default() -> Self {
        Self { delta: 0.05, eps0: 1e-2, ball_samples: 2000, seed: 0 }
    }
}

/// Margins recorded for one accepted step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepMargins {
    pub step: usize,
    pub s: u32,
    pub eps: f64,
    pub radius: f64,
    pub degree: usize,
    pub axis: usize,
    pub displacement: f64,
    pub expulsion: f64,
    /// `delta - max |A(phi(x)) - A(x)|` on the unit ball.
    pub star: f64,
    /// `1 - max |F(j)(x)|` over K samples.
    pub b: f64,
    /// `min |F(j)(v)| - 1` over tracked V samples.
    pub c: f64,
    /// V samples whose images overflowed and are no longer tracked.
    pub retired: usize,
}

/// `F(j)` with the samples it is tracked on.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct InductionState<T> {
    pub step: usize,
    /// `F_1, ..., F_j`.
    pub sequence: AutoSequence<T>,
    pub ball: Vec<C2<T>>,
    /// `K_j`, original coordinates.
    pub k_samples: Vec<C2<T>>,
    /// `F(j)(K_j)`.
    pub k_images: Vec<C2<T>>,
    /// Tracked V samples, original coordinates.
    pub v_samples: Vec<C2<T>>,
    /// `F(j)(V)`.
    pub v_images: Vec<C2<T>>,
    pub retired: usize,
    pub params: InductionParams,
    pub history: Vec<StepMargins>,
}

impl<T: Real> InductionState<T> {
    /// `F(0) = id`; V must avoid the closed unit ball.
    pub fn new(v: Vec<C2<T>>, params: InductionParams) -> Result<Self> {
        let c = v.iter().map(|x| x.norm()).fold(T::infinity(), T::min);
        if !v.is_empty() && !(c > T::one()) {
            return Err(Error::InductionViolation { which: 'c', step: 0, margin: (c - T::one()).as_f64() });
        }
        Ok(Self {
            step: 0,
            sequence: AutoSequence::new(Vec::new(), None)?,
            ball: unit_ball_samples(params.ball_samples, params.seed),
            k_samples: Vec::new(),
            k_images: Vec::new(),
            v_images: v.clone(),
            v_samples: v,
            retired: 0,
            params,
            history: Vec::new(),
        })
    }

    pub fn eps(&self) -> f64 {
        self.params.eps0 * 0.5f64.powi(self.step as i32)
    }

    /// The sequence so far followed by the halving map forever.
    pub fn basin_sequence(&self) -> AutoSequence<T> {
        AutoSequence::new(self.sequence.maps().to_vec(), Some(HoloMap::halving())).expect("entries already checked")
    }
}

fn contraction_pow<T: Real>(s: u32) -> HoloMap<T> {
    let f = Complex::new(T::lit(0.5f64.powi(s as i32)), T::zero());
    HoloMap::DiagonalContraction { factors: [f, f] }
}

/// One step of the induction: push `F(j)(V)` out of `A^-s(B_2)` while
/// `eps`-fixing the unit ball and `F(j)(K_next)`, then contract by `A^s`.
pub fn fb_induction_step<T: Real>(
    state: &InductionState<T>,
    k_next: &[C2<T>],
    pusher: &dyn Pusher<T>,
) -> Result<InductionState<T>> {
    let j = state.step;
    let prefix = state.sequence.prefix(j);
    let moved = prefix.eval_all(k_next)?;
    if moved.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonConvergence { detail: format!("F({j})(K) overflowed") });
    }
    let mut k: Vec<C2<T>> = state.ball.clone();
    k.extend_from_slice(&moved);

    let eps = T::lit(state.eps());
    let reach = k.iter().map(|x| x.norm()).fold(T::zero(), T::max) + eps;
    let mut s = 0u32;
    while !(reach * T::lit(0.5f64.powi(s as i32)) < T::one()) {
        s += 1;
    }
    s += 1;
    let radius = T::lit(2f64.powi(s as i32 + 1));

    let req = PusherRequest { k, v: state.v_images.clone(), radius, eps, fixed: Some(C2::origin()) };
    let res = pusher.push(&req)?;
    let (disp, exp) = pusher_margins(&res.map, &req)?;
    if !(disp < eps) || !(exp >= radius) {
        return Err(Error::PusherShortfall(format!(
            "displacement {:e} (eps {:e}), expulsion {:e} (R {:e})",
            disp.as_f64(),
            eps.as_f64(),
            exp.as_f64(),
            radius.as_f64()
        )));
    }

    let sigma = res.map.clone().then(HoloMap::halving());
    let star = check_star(&sigma, T::lit(state.params.delta), &state.ball);
    if !star.pass {
        return Err(Error::StarViolation { step: j + 1, margin: star.margin.as_f64() });
    }

    let f = res.map.clone().then(contraction_pow(s));
    let k_images = f.eval_all(&moved)?;
    let ball_images = f.eval_all(&state.ball)?;
    let b = T::one() - k_images.iter().chain(&ball_images).map(|x| x.norm()).fold(T::zero(), T::max);
    if !(b > T::zero()) {
        return Err(Error::InductionViolation { which: 'b', step: j + 1, margin: b.as_f64() });
    }
    let mut v_samples = Vec::with_capacity(state.v_samples.len());
    let mut v_images = Vec::with_capacity(state.v_samples.len());
    let mut retired = state.retired;
    for (x, y) in state.v_samples.iter().zip(&state.v_images) {
        match f.eval(*y) {
            Ok(z) if z.is_finite() => {
                v_samples.push(*x);
                v_images.push(z);
            }
            _ => retired += 1,
        }
    }
    let c = v_images.iter().map(|x| x.norm()).fold(T::infinity(), T::min) - T::one();
    if !(c > T::zero()) {
        return Err(Error::InductionViolation { which: 'c', step: j + 1, margin: c.as_f64() });
    }

    let mut next = state.clone();
    next.sequence.push(f)?;
    next.step = j + 1;
    next.k_samples = k_next.to_vec();
    next.k_images = k_images;
    next.v_samples = v_samples;
    next.v_images = v_images;
    next.retired = retired;
    next.history.push(StepMargins {
        step: j + 1,
        s,
        eps: eps.as_f64(),
        radius: radius.as_f64(),
        degree: res.degree,
        axis: res.axis,
        displacement: disp.as_f64(),
        expulsion: exp.as_f64(),
        star: star.margin.as_f64(),
        b: b.as_f64(),
        c: c.as_f64(),
        retired,
    });
    log::info!("induction step {} accepted: s = {s}, degree {}, b {:e}, c {:e}", j + 1, res.degree, b.as_f64(), c.as_f64());
    Ok(next)
}

/// The model scenario: `K_j` is the ball of radius `2 - 2^-j`, `V` the
/// proper curve `t -> (3 + t, t/2)`, `t` in `[0, 20]`.
pub fn model_scenario<T: Real>(v_samples: usize, k_samples: usize, seed: u64) -> (Vec<C2<T>>, impl Fn(usize) -> Vec<C2<T>>) {
    let v = (0..v_samples)
        .map(|i| {
            let t = 20.0 * i as f64 / (v_samples - 1).max(1) as f64;
            C2::new(Complex::new(T::lit(3.0 + t), T::zero()), Complex::new(T::lit(t / 2.0), T::zero()))
        })
        .collect();
    let k = move |j: usize| {
        let rho = T::lit(2.0 - 0.5f64.powi(j as i32));
        unit_ball_samples::<T>(k_samples, seed.wrapping_add(j as u64 + 1)).into_iter().map(|x| x * rho).collect()
    };
    (v, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basin::{basin_membership, BasinQuery, ModelPusher};

    #[test]
    fn empty_v_accepts_identity_push() {
        let st = InductionState::<f64>::new(Vec::new(), InductionParams { ball_samples: 200, ..Default::default() }).unwrap();
        let k: Vec<C2<f64>> = unit_ball_samples(100, 5).into_iter().map(|x| x * 0.5).collect();
        let next = fb_induction_step(&st, &k, &ModelPusher::default()).unwrap();
        assert_eq!(next.history[0].degree, 0);
        assert!(next.history[0].b > 0.0);
    }

    #[test]
    fn five_model_steps_keep_hypotheses() {
        let (v, kj) = model_scenario::<f64>(400, 500, 7);
        let mut st = InductionState::new(v, InductionParams { ball_samples: 500, ..Default::default() }).unwrap();
        for j in 1..=5 {
            st = fb_induction_step(&st, &kj(j), &ModelPusher::default()).unwrap();
            let m = st.history.last().unwrap();
            assert!(m.b > 0.0 && m.c > 0.0, "{m:?}");
        }
        let seq = st.basin_sequence();
        let q = BasinQuery::default();
        for x in kj(1) {
            assert!(basin_membership(&seq, x, &q).converged());
        }
    }

    #[test]
    fn v_inside_ball_rejected() {
        let v = vec![C2::new(Complex::new(0.5, 0.0), Complex::new(0.0, 0.0))];
        assert!(matches!(
            InductionState::<f64>::new(v, InductionParams::default()),
            Err(Error::InductionViolation { which: 'c', .. })
        ));
    }
}
