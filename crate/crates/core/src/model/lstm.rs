//! A single LSTM cell with peephole connections.
//!
//! Recurrence (logistic gates, tanh candidate; peepholes optional):
//! ```text
//! i_t = sigma(W_xi^T x_t + W_hi^T h_prev + p_i  . c_prev + b_i)
//! f_t = sigma(W_xf^T x_t + W_hf^T h_prev + p_f  . c_prev + b_f)
//! g_t = tanh (W_xg^T x_t + W_hg^T h_prev                 + b_g)
//! c_t = f_t . c_prev + i_t . g_t
//! o_t = sigma(W_xo^T x_t + W_ho^T h_prev + p_o  . c_t    + b_o)
//! h_t = o_t . tanh(c_t)
//! ```
//! Input weights have shape (input dim, H), recurrent weights (H, H),
//! peepholes and biases (H, 1); `.` is the elementwise product.

use crate::error::Result;
use crate::nn::{uniform_init, zeros_col, Matrix, Parameter, RngState};

const INIT_LO: f64 = -0.1;
const INIT_HI: f64 = 0.1;

/// Gate and state values cached by one forward step, consumed by the
/// matching backward step.
#[derive(Debug, Clone)]
pub struct CellTrace {
    pub i: Matrix,
    pub f: Matrix,
    pub g: Matrix,
    pub o: Matrix,
    pub c: Matrix,
    pub h: Matrix,
}

#[derive(Debug, Clone)]
pub struct LstmCell {
    pub w_xi: Parameter,
    pub w_hi: Parameter,
    pub p_i: Parameter,
    pub b_i: Parameter,
    pub w_xf: Parameter,
    pub w_hf: Parameter,
    pub p_f: Parameter,
    pub b_f: Parameter,
    pub w_xo: Parameter,
    pub w_ho: Parameter,
    pub p_o: Parameter,
    pub b_o: Parameter,
    pub w_xg: Parameter,
    pub w_hg: Parameter,
    pub b_g: Parameter,
    peepholes: bool,
}

impl LstmCell {
    /// Random cell with weights, biases, and (when enabled) peepholes
    /// drawn uniformly from [-0.1, 0.1); disabled peepholes stay zero.
    pub fn new(
        prefix: &str,
        input_dim: usize,
        hidden: usize,
        peepholes: bool,
        rng: &mut RngState,
    ) -> Result<Self> {
        let mat = |name: &str, rows, cols, rng: &mut RngState| -> Result<Parameter> {
            Ok(Parameter::new(
                format!("{prefix}.{name}"),
                uniform_init(rows, cols, INIT_LO, INIT_HI, rng)?,
            ))
        };
        let peep = |name: &str, rng: &mut RngState| -> Result<Parameter> {
            let value = if peepholes {
                uniform_init(hidden, 1, INIT_LO, INIT_HI, rng)?
            } else {
                zeros_col(hidden)
            };
            Ok(Parameter::new(format!("{prefix}.{name}"), value))
        };
        // Draw order is part of the determinism contract: gate blocks
        // i, f, o, then the candidate block g.
        Ok(LstmCell {
            w_xi: mat("w_xi", input_dim, hidden, rng)?,
            w_hi: mat("w_hi", hidden, hidden, rng)?,
            p_i: peep("p_i", rng)?,
            b_i: mat("b_i", hidden, 1, rng)?,
            w_xf: mat("w_xf", input_dim, hidden, rng)?,
            w_hf: mat("w_hf", hidden, hidden, rng)?,
            p_f: peep("p_f", rng)?,
            b_f: mat("b_f", hidden, 1, rng)?,
            w_xo: mat("w_xo", input_dim, hidden, rng)?,
            w_ho: mat("w_ho", hidden, hidden, rng)?,
            p_o: peep("p_o", rng)?,
            b_o: mat("b_o", hidden, 1, rng)?,
            w_xg: mat("w_xg", input_dim, hidden, rng)?,
            w_hg: mat("w_hg", hidden, hidden, rng)?,
            b_g: mat("b_g", hidden, 1, rng)?,
            peepholes,
        })
    }

    /// Rebuild a cell from 15 matrices in the fixed parameter order
    /// (deserialization path); shapes are checked by `validate`.
    pub(crate) fn from_matrices(prefix: &str, peepholes: bool, mats: Vec<Matrix>) -> Result<Self> {
        if mats.len() != 15 {
            return Err(crate::error::Error::Corrupt(format!(
                "{} matrices for an LSTM cell, expected 15",
                mats.len()
            )));
        }
        let names = [
            "w_xi", "w_hi", "p_i", "b_i", "w_xf", "w_hf", "p_f", "b_f",
            "w_xo", "w_ho", "p_o", "b_o", "w_xg", "w_hg", "b_g",
        ];
        let mut it = mats
            .into_iter()
            .zip(names)
            .map(|(m, n)| Parameter::new(format!("{prefix}.{n}"), m));
        let mut next = || it.next().expect("15 matrices");
        Ok(LstmCell {
            w_xi: next(), w_hi: next(), p_i: next(), b_i: next(),
            w_xf: next(), w_hf: next(), p_f: next(), b_f: next(),
            w_xo: next(), w_ho: next(), p_o: next(), b_o: next(),
            w_xg: next(), w_hg: next(), b_g: next(),
            peepholes,
        })
    }

    /// Check every matrix against the cell's declared dimensions.
    pub fn validate(&self, input_dim: usize, hidden: usize) -> Result<()> {
        for p in self.params() {
            let want = match p.name.rsplit('.').next().unwrap_or("") {
                "w_xi" | "w_xf" | "w_xo" | "w_xg" => (input_dim, hidden),
                "w_hi" | "w_hf" | "w_ho" | "w_hg" => (hidden, hidden),
                _ => (hidden, 1),
            };
            if p.value.dim() != want {
                return Err(crate::error::Error::ShapeMismatch(format!(
                    "{}: expected {:?}, found {:?}",
                    p.name,
                    want,
                    p.value.dim()
                )));
            }
        }
        Ok(())
    }

    pub fn hidden(&self) -> usize {
        self.w_hi.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_xi.rows()
    }

    pub fn uses_peepholes(&self) -> bool {
        self.peepholes
    }

    /// One forward step from (h_prev, c_prev) on input x; all three are
    /// (dim, 1) columns.
    pub fn step(&self, x: &Matrix, h_prev: &Matrix, c_prev: &Matrix) -> CellTrace {
        debug_assert_eq!(x.dim(), (self.input_dim(), 1));
        debug_assert_eq!(h_prev.dim(), (self.hidden(), 1));
        debug_assert_eq!(c_prev.dim(), (self.hidden(), 1));

        let mut a_i = self.w_xi.value.t().dot(x) + self.w_hi.value.t().dot(h_prev) + &self.b_i.value;
        let mut a_f = self.w_xf.value.t().dot(x) + self.w_hf.value.t().dot(h_prev) + &self.b_f.value;
        if self.peepholes {
            a_i += &(&self.p_i.value * c_prev);
            a_f += &(&self.p_f.value * c_prev);
        }
        let i = a_i.mapv(crate::nn::logistic);
        let f = a_f.mapv(crate::nn::logistic);
        let g = (self.w_xg.value.t().dot(x) + self.w_hg.value.t().dot(h_prev) + &self.b_g.value)
            .mapv(f64::tanh);
        let c = &f * c_prev + &i * &g;
        let mut a_o = self.w_xo.value.t().dot(x) + self.w_ho.value.t().dot(h_prev) + &self.b_o.value;
        if self.peepholes {
            a_o += &(&self.p_o.value * &c);
        }
        let o = a_o.mapv(crate::nn::logistic);
        let h = &o * &c.mapv(f64::tanh);
        CellTrace { i, f, g, o, c, h }
    }

    /// Backward through one step. `dh`/`dc_next` are the loss gradients
    /// flowing into h_t and c_t from later timesteps and the layer above.
    /// Accumulates parameter gradients and returns (dx, dh_prev, dc_prev).
    #[allow(clippy::too_many_arguments)]
    pub fn step_backward(
        &mut self,
        x: &Matrix,
        h_prev: &Matrix,
        c_prev: &Matrix,
        trace: &CellTrace,
        dh: &Matrix,
        dc_next: &Matrix,
    ) -> (Matrix, Matrix, Matrix) {
        let CellTrace { i, f, g, o, c, .. } = trace;
        let tanh_c = c.mapv(f64::tanh);

        // The output gate sees c_t, so its preactivation gradient must be
        // formed before the cell gradient it feeds back into.
        let d_o = dh * &tanh_c;
        let da_o = &d_o * o * &o.mapv(|v| 1.0 - v);
        let mut dc = dh * o * &tanh_c.mapv(|v| 1.0 - v * v) + dc_next;
        if self.peepholes {
            dc += &(&self.p_o.value * &da_o);
        }

        let di = &dc * g;
        let da_i = &di * i * &i.mapv(|v| 1.0 - v);
        let df = &dc * c_prev;
        let da_f = &df * f * &f.mapv(|v| 1.0 - v);
        let dg = &dc * i;
        let da_g = &dg * &g.mapv(|v| 1.0 - v * v);

        for (w_x, w_h, b, da) in [
            (&mut self.w_xi, &mut self.w_hi, &mut self.b_i, &da_i),
            (&mut self.w_xf, &mut self.w_hf, &mut self.b_f, &da_f),
            (&mut self.w_xo, &mut self.w_ho, &mut self.b_o, &da_o),
            (&mut self.w_xg, &mut self.w_hg, &mut self.b_g, &da_g),
        ] {
            w_x.grad += &x.dot(&da.t());
            w_h.grad += &h_prev.dot(&da.t());
            b.grad += da;
        }
        if self.peepholes {
            self.p_i.grad += &(&da_i * c_prev);
            self.p_f.grad += &(&da_f * c_prev);
            self.p_o.grad += &(&da_o * c);
        }

        let dx = self.w_xi.value.dot(&da_i)
            + self.w_xf.value.dot(&da_f)
            + self.w_xo.value.dot(&da_o)
            + self.w_xg.value.dot(&da_g);
        let dh_prev = self.w_hi.value.dot(&da_i)
            + self.w_hf.value.dot(&da_f)
            + self.w_ho.value.dot(&da_o)
            + self.w_hg.value.dot(&da_g);
        let mut dc_prev = &dc * f;
        if self.peepholes {
            dc_prev += &(&self.p_i.value * &da_i);
            dc_prev += &(&self.p_f.value * &da_f);
        }
        (dx, dh_prev, dc_prev)
    }

    /// All 15 parameters in the fixed order used everywhere (gate blocks
    /// i, f, o, then g).
    pub fn params(&self) -> Vec<&Parameter> {
        vec![
            &self.w_xi, &self.w_hi, &self.p_i, &self.b_i,
            &self.w_xf, &self.w_hf, &self.p_f, &self.b_f,
            &self.w_xo, &self.w_ho, &self.p_o, &self.b_o,
            &self.w_xg, &self.w_hg, &self.b_g,
        ]
    }

    pub fn params_mut(&mut self) -> Vec<&mut Parameter> {
        vec![
            &mut self.w_xi, &mut self.w_hi, &mut self.p_i, &mut self.b_i,
            &mut self.w_xf, &mut self.w_hf, &mut self.p_f, &mut self.b_f,
            &mut self.w_xo, &mut self.w_ho, &mut self.p_o, &mut self.b_o,
            &mut self.w_xg, &mut self.w_hg, &mut self.b_g,
        ]
    }
}
