//! 3-DOF surface vessel model
//!
//! ```text
//! eta_dot = R(psi) nu
//! M nu_dot + C(nu) nu + D(nu) nu = tau,   tau = [X, 0, N]
//! ```
//!
//! with pose `eta = [x, y, psi]` in NED and body velocities `nu = [u, v, r]`.
//! `C(nu)` is the skew-symmetric Coriolis matrix generated from a mass
//! matrix (`C(nu) nu` never does work), and `D(nu) = D_lin + diag(d_quad * |nu|)`.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{Cholesky, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of state components `[x, y, psi, u, v, r]`.
pub const NX: usize = 6;
/// Number of control components `[X, N]`.
pub const NU: usize = 2;

pub type StateVec = [f64; NX];
pub type ControlVec = [f64; NU];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::Config(format!(
                "bounds must be finite with min < max, got [{min}, {max}]"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VesselParams {
    mass: Matrix3<f64>,
    mass_inv: Matrix3<f64>,
    coriolis_mass: Matrix3<f64>,
    damping_linear: Matrix3<f64>,
    damping_quadratic: Vector3<f64>,
    /// Surge force `X` and yaw moment `N` limits.
    pub force_bounds: Interval,
    pub moment_bounds: Interval,
    /// Limits on `u`, `v`, `r`.
    pub velocity_bounds: [Interval; 3],
}

const DEFAULT_FILE: &str = include_str!("../data/vessel_default.txt");

impl Default for VesselParams {
    fn default() -> Self {
        Self::parse(DEFAULT_FILE, "<built-in vessel defaults>")
            .expect("bundled vessel parameters are valid")
    }
}

impl VesselParams {
    pub fn new(
        mass: Matrix3<f64>,
        coriolis_mass: Matrix3<f64>,
        damping_linear: Matrix3<f64>,
        damping_quadratic: Vector3<f64>,
        force_bounds: Interval,
        moment_bounds: Interval,
        velocity_bounds: [Interval; 3],
    ) -> Result<Self> {
        if mass.iter().any(|v| !v.is_finite()) || (mass - mass.transpose()).amax() > 1e-9 * mass.amax() {
            return Err(Error::Config("inertia matrix M must be finite and symmetric".into()));
        }
        let mass_inv = Cholesky::new(mass)
            .ok_or_else(|| Error::Config("inertia matrix M is not positive definite".into()))?
            .inverse();
        let sym = (damping_linear + damping_linear.transpose()) * 0.5;
        let min_eig = SymmetricEigen::new(sym).eigenvalues.min();
        if damping_linear.iter().any(|v| !v.is_finite()) || min_eig < -1e-9 * sym.amax().max(1.0) {
            return Err(Error::Config(
                "linear damping must be positive semi-definite".into(),
            ));
        }
        if damping_quadratic.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Config(
                "quadratic damping coefficients must be finite and >= 0".into(),
            ));
        }
        Ok(Self {
            mass,
            mass_inv,
            coriolis_mass,
            damping_linear,
            damping_quadratic,
            force_bounds,
            moment_bounds,
            velocity_bounds,
        })
    }

    pub fn mass(&self) -> &Matrix3<f64> {
        &self.mass
    }

    pub fn mass_inv(&self) -> &Matrix3<f64> {
        &self.mass_inv
    }

    pub fn coriolis_mass(&self) -> &Matrix3<f64> {
        &self.coriolis_mass
    }

    pub fn damping_linear(&self) -> &Matrix3<f64> {
        &self.damping_linear
    }

    pub fn damping_quadratic(&self) -> &Vector3<f64> {
        &self.damping_quadratic
    }

    /// Copy with Coriolis and damping switched off.
    pub fn without_coriolis_and_damping(&self) -> Self {
        let mut p = self.clone();
        p.coriolis_mass = Matrix3::zeros();
        p.damping_linear = Matrix3::zeros();
        p.damping_quadratic = Vector3::zeros();
        p
    }

    pub fn with_damping(mut self, linear: Matrix3<f64>, quadratic: Vector3<f64>) -> Result<Self> {
        self.damping_linear = linear;
        self.damping_quadratic = quadratic;
        Self::new(
            self.mass,
            self.coriolis_mass,
            self.damping_linear,
            self.damping_quadratic,
            self.force_bounds,
            self.moment_bounds,
            self.velocity_bounds,
        )
    }

    /// Largest turn rate allowed by the velocity bounds.
    pub fn max_turn_rate(&self) -> f64 {
        self.velocity_bounds[2].max.min(-self.velocity_bounds[2].min)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses the flat `key = value` parameter format. `#` starts a comment.
    /// Missing keys take the built-in defaults, except that a file must not
    /// be empty of recognised keys. `c11..c33` (Coriolis generator) default
    /// to the inertia matrix.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut values: HashMap<String, f64> = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: origin.to_string(),
                line: lineno + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            if !is_known_key(key) {
                return Err(parse_err(format!("unknown key `{key}`")));
            }
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("`{}` is not a number", value.trim())))?;
            if !value.is_finite() {
                return Err(parse_err(format!("`{key}` must be finite")));
            }
            if values.insert(key.to_string(), value).is_some() {
                return Err(parse_err(format!("duplicate key `{key}`")));
            }
        }
        let defaults = if origin == "<built-in vessel defaults>" {
            None
        } else {
            Some(Self::default())
        };
        let get = |key: &str, fallback: f64| values.get(key).copied().unwrap_or(fallback);
        let matrix = |prefix: &str, fallback: Option<&Matrix3<f64>>| -> Result<Matrix3<f64>> {
            let mut m = Matrix3::zeros();
            for i in 0..3 {
                for j in 0..3 {
                    let key = format!("{prefix}{}{}", i + 1, j + 1);
                    m[(i, j)] = match (values.get(&key), fallback) {
                        (Some(v), _) => *v,
                        (None, Some(f)) => f[(i, j)],
                        (None, None) => {
                            return Err(Error::Config(format!("{origin}: missing key `{key}`")))
                        }
                    };
                }
            }
            Ok(m)
        };
        let d = defaults.as_ref();
        let mass = matrix("m", d.map(|p| &p.mass))?;
        let coriolis_mass = if (1..=3).any(|i| (1..=3).any(|j| values.contains_key(&format!("c{i}{j}")))) {
            matrix("c", Some(&mass))?
        } else {
            mass
        };
        let damping_linear = matrix("d_lin", d.map(|p| &p.damping_linear))?;
        let dq = d.map(|p| p.damping_quadratic).unwrap_or_else(Vector3::zeros);
        let damping_quadratic = Vector3::new(
            get("d_quad_u", dq[0]),
            get("d_quad_v", dq[1]),
            get("d_quad_r", dq[2]),
        );
        let interval = |lo: &str, hi: &str, fb: Option<Interval>| -> Result<Interval> {
            match (values.get(lo), values.get(hi), fb) {
                (Some(&a), Some(&b), _) => Interval::new(a, b),
                (a, b, Some(f)) => Interval::new(a.copied().unwrap_or(f.min), b.copied().unwrap_or(f.max)),
                _ => Err(Error::Config(format!("{origin}: missing `{lo}`/`{hi}`"))),
            }
        };
        Self::new(
            mass,
            coriolis_mass,
            damping_linear,
            damping_quadratic,
            interval("x_min", "x_max", d.map(|p| p.force_bounds))?,
            interval("n_min", "n_max", d.map(|p| p.moment_bounds))?,
            [
                interval("u_min", "u_max", d.map(|p| p.velocity_bounds[0]))?,
                interval("v_min", "v_max", d.map(|p| p.velocity_bounds[1]))?,
                interval("r_min", "r_max", d.map(|p| p.velocity_bounds[2]))?,
            ],
        )
    }
}

fn is_known_key(key: &str) -> bool {
    const SCALARS: [&str; 13] = [
        "d_quad_u", "d_quad_v", "d_quad_r", "x_min", "x_max", "n_min", "n_max", "u_min", "u_max",
        "v_min", "v_max", "r_min", "r_max",
    ];
    if SCALARS.contains(&key) {
        return true;
    }
    ["m", "c", "d_lin"].iter().any(|prefix| {
        key.strip_prefix(prefix).is_some_and(|rest| {
            let b = rest.as_bytes();
            b.len() == 2 && (b'1'..=b'3').contains(&b[0]) && (b'1'..=b'3').contains(&b[1])
        })
    })
}

/// Pose and body velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    /// `[x, y, psi]`: North, East, heading (unwrapped).
    pub eta: [f64; 3],
    /// `[u, v, r]`: surge, sway, yaw rate.
    pub nu: [f64; 3],
}

impl State {
    pub fn new(eta: [f64; 3], nu: [f64; 3]) -> Self {
        Self { eta, nu }
    }

    pub fn to_array(self) -> StateVec {
        [self.eta[0], self.eta[1], self.eta[2], self.nu[0], self.nu[1], self.nu[2]]
    }

    pub fn from_array(x: &StateVec) -> Self {
        Self {
            eta: [x[0], x[1], x[2]],
            nu: [x[3], x[4], x[5]],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.eta.iter().chain(&self.nu).all(|v| v.is_finite())
    }
}

/// Surge force `X` (N) and yaw moment `N` (N m).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Control {
    pub surge_force: f64,
    pub yaw_moment: f64,
}

impl Control {
    pub fn new(surge_force: f64, yaw_moment: f64) -> Self {
        Self {
            surge_force,
            yaw_moment,
        }
    }

    pub fn to_array(self) -> ControlVec {
        [self.surge_force, self.yaw_moment]
    }

    pub fn from_array(u: &ControlVec) -> Self {
        Self::new(u[0], u[1])
    }
}

pub fn rotation(psi: f64) -> Matrix3<f64> {
    let (s, c) = psi.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// `C(nu)`: with `a = C_gen nu`, the skew form `[[0, 0, -a2], [0, 0, a1], [a2, -a1, 0]]`.
pub fn coriolis(p: &VesselParams, nu: &Vector3<f64>) -> Matrix3<f64> {
    let a = p.coriolis_mass * nu;
    Matrix3::new(0.0, 0.0, -a[1], 0.0, 0.0, a[0], a[1], -a[0], 0.0)
}

pub fn damping(p: &VesselParams, nu: &Vector3<f64>) -> Matrix3<f64> {
    let q = &p.damping_quadratic;
    p.damping_linear
        + Matrix3::from_diagonal(&Vector3::new(
            q[0] * nu[0].abs(),
            q[1] * nu[1].abs(),
            q[2] * nu[2].abs(),
        ))
}

/// `tau` required to realise acceleration `nu_dot` at velocity `nu`.
pub fn inverse_dynamics(p: &VesselParams, nu: &Vector3<f64>, nu_dot: &Vector3<f64>) -> Vector3<f64> {
    p.mass * nu_dot + coriolis(p, nu) * nu + damping(p, nu) * nu
}

pub fn kinetic_energy(p: &VesselParams, nu: &[f64; 3]) -> f64 {
    let v = Vector3::from(*nu);
    0.5 * v.dot(&(p.mass * v))
}

/// `(eta_dot, nu_dot)`.
pub fn dynamics(s: &State, ctrl: &Control, p: &VesselParams) -> ([f64; 3], [f64; 3]) {
    let d = state_derivative(&s.to_array(), &ctrl.to_array(), p);
    ([d[0], d[1], d[2]], [d[3], d[4], d[5]])
}

pub fn state_derivative(x: &StateVec, u: &ControlVec, p: &VesselParams) -> StateVec {
    let nu = Vector3::new(x[3], x[4], x[5]);
    let eta_dot = rotation(x[2]) * nu;
    let tau = Vector3::new(u[0], 0.0, u[1]);
    let nu_dot = p.mass_inv * (tau - coriolis(p, &nu) * nu - damping(p, &nu) * nu);
    [eta_dot[0], eta_dot[1], eta_dot[2], nu_dot[0], nu_dot[1], nu_dot[2]]
}

/// Jacobians `(df/dx, df/du)` of [`state_derivative`].
pub fn state_jacobian(
    x: &StateVec,
    u: &ControlVec,
    p: &VesselParams,
) -> ([[f64; NX]; NX], [[f64; NU]; NX]) {
    let _ = u;
    let (s, c) = x[2].sin_cos();
    let (uu, vv, rr) = (x[3], x[4], x[5]);
    let mut a = [[0.0; NX]; NX];
    // eta_dot = R(psi) nu
    a[0][2] = -s * uu - c * vv;
    a[0][3] = c;
    a[0][4] = -s;
    a[1][2] = c * uu - s * vv;
    a[1][3] = s;
    a[1][4] = c;
    a[2][5] = 1.0;

    // d(C(nu) nu)/dnu with a = P nu: C nu = [-a2 r, a1 r, a2 u - a1 v].
    let pm = &p.coriolis_mass;
    let nu = Vector3::new(uu, vv, rr);
    let av = pm * nu;
    let mut dc = Matrix3::zeros();
    for j in 0..3 {
        dc[(0, j)] = -pm[(1, j)] * rr;
        dc[(1, j)] = pm[(0, j)] * rr;
        dc[(2, j)] = pm[(1, j)] * uu - pm[(0, j)] * vv;
    }
    dc[(0, 2)] -= av[1];
    dc[(1, 2)] += av[0];
    dc[(2, 0)] += av[1];
    dc[(2, 1)] -= av[0];
    let q = &p.damping_quadratic;
    let dd = p.damping_linear
        + Matrix3::from_diagonal(&Vector3::new(
            2.0 * q[0] * uu.abs(),
            2.0 * q[1] * vv.abs(),
            2.0 * q[2] * rr.abs(),
        ));
    let dnu = -(p.mass_inv * (dc + dd));
    for i in 0..3 {
        for j in 0..3 {
            a[3 + i][3 + j] = dnu[(i, j)];
        }
    }
    let mut b = [[0.0; NU]; NX];
    for i in 0..3 {
        b[3 + i][0] = p.mass_inv[(i, 0)];
        b[3 + i][1] = p.mass_inv[(i, 2)];
    }
    (a, b)
}

/// One classical Runge-Kutta step of `x' = f(x)`.
pub fn rk4<const N: usize>(f: impl Fn(&[f64; N]) -> [f64; N], x: &[f64; N], dt: f64) -> [f64; N] {
    let axpy = |x: &[f64; N], k: &[f64; N], h: f64| std::array::from_fn(|i| x[i] + h * k[i]);
    let k1 = f(x);
    let k2 = f(&axpy(x, &k1, 0.5 * dt));
    let k3 = f(&axpy(x, &k2, 0.5 * dt));
    let k4 = f(&axpy(x, &k3, dt));
    std::array::from_fn(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// One improved-Euler (Heun) step of `x' = f(x)`.
pub fn heun<const N: usize>(f: impl Fn(&[f64; N]) -> [f64; N], x: &[f64; N], dt: f64) -> [f64; N] {
    let k1 = f(x);
    let pred: [f64; N] = std::array::from_fn(|i| x[i] + dt * k1[i]);
    let k2 = f(&pred);
    std::array::from_fn(|i| x[i] + 0.5 * dt * (k1[i] + k2[i]))
}

/// RK4 step of the vessel with the control held over the step.
pub fn rk4_step(s: &State, ctrl: &Control, p: &VesselParams, dt: f64) -> State {
    let u = ctrl.to_array();
    State::from_array(&rk4(|x| state_derivative(x, &u, p), &s.to_array(), dt))
}

/// Heun step of the vessel with the control held over the step.
pub fn heun_step(s: &State, ctrl: &Control, p: &VesselParams, dt: f64) -> State {
    let u = ctrl.to_array();
    State::from_array(&heun(|x| state_derivative(x, &u, p), &s.to_array(), dt))
}

/// `substeps` RK4 steps of length `dt / substeps`, returning the final state
/// and its sensitivity `[dx/dx0 | dx/du]` (6 x 8).
pub fn rk4_flow_with_sensitivity(
    x0: &StateVec,
    u: &ControlVec,
    p: &VesselParams,
    dt: f64,
    substeps: usize,
) -> (StateVec, [[f64; NX + NU]; NX]) {
    const NP: usize = NX + NU;
    let h = dt / substeps as f64;
    let mut x = *x0;
    let mut sens = [[0.0; NP]; NX];
    for (i, row) in sens.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    // d(stage derivative)/dp = A * dxs/dp + B * du/dp, with du/dp = [0 | I].
    let stage = |xs: &StateVec, ds: &[[f64; NP]; NX]| -> (StateVec, [[f64; NP]; NX]) {
        let k = state_derivative(xs, u, p);
        let (a, b) = state_jacobian(xs, u, p);
        let mut dk = [[0.0; NP]; NX];
        for i in 0..NX {
            for j in 0..NP {
                let mut acc = 0.0;
                for m in 0..NX {
                    acc += a[i][m] * ds[m][j];
                }
                if j >= NX {
                    acc += b[i][j - NX];
                }
                dk[i][j] = acc;
            }
        }
        (k, dk)
    };
    let shift = |x: &StateVec, sx: &[[f64; NP]; NX], k: &StateVec, dk: &[[f64; NP]; NX], c: f64| {
        let xs: StateVec = std::array::from_fn(|i| x[i] + c * k[i]);
        let ss: [[f64; NP]; NX] = std::array::from_fn(|i| std::array::from_fn(|j| sx[i][j] + c * dk[i][j]));
        (xs, ss)
    };
    for _ in 0..substeps {
        let (k1, d1) = stage(&x, &sens);
        let (x2, s2) = shift(&x, &sens, &k1, &d1, 0.5 * h);
        let (k2, d2) = stage(&x2, &s2);
        let (x3, s3) = shift(&x, &sens, &k2, &d2, 0.5 * h);
        let (k3, d3) = stage(&x3, &s3);
        let (x4, s4) = shift(&x, &sens, &k3, &d3, h);
        let (k4, d4) = stage(&x4, &s4);
        for i in 0..NX {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            for j in 0..NP {
                sens[i][j] += h / 6.0 * (d1[i][j] + 2.0 * d2[i][j] + 2.0 * d3[i][j] + d4[i][j]);
            }
        }
    }
    (x, sens)
}

/// `substeps` RK4 steps without sensitivities.
pub fn rk4_flow(x0: &StateVec, u: &ControlVec, p: &VesselParams, dt: f64, substeps: usize) -> StateVec {
    let h = dt / substeps as f64;
    let mut x = *x0;
    for _ in 0..substeps {
        x = rk4(|s| state_derivative(s, u, p), &x, h);
    }
    x
}
