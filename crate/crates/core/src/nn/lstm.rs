//! A standard LSTM (input, forget, output gates and a tanh candidate) and
//! its backward pass. The weight matrix acts on `[x; h_prev]` and its rows
//! are the four gate blocks in the order i, f, g, o.

use super::tensor::{Scalar, Tensor};

pub struct LstmCache<T> {
    /// `[x_t; h_{t-1}]` for every step.
    inputs: Vec<Vec<T>>,
    /// Activated gates `[i; f; g; o]`.
    gates: Vec<Vec<T>>,
    cells: Vec<Vec<T>>,
    pub hidden: Vec<Vec<T>>,
}

impl<T: Scalar> LstmCache<T> {
    pub fn last(&self) -> &[T] {
        self.hidden.last().expect("nonempty sequence")
    }
}

/// Runs the cell over `xs` from zero initial state.
pub fn forward<T: Scalar>(w: &Tensor<T>, b: &Tensor<T>, xs: &[&[T]]) -> LstmCache<T> {
    let h = w.rows / 4;
    let n_in = w.cols - h;
    let mut cache = LstmCache {
        inputs: Vec::with_capacity(xs.len()),
        gates: Vec::with_capacity(xs.len()),
        cells: Vec::with_capacity(xs.len()),
        hidden: Vec::with_capacity(xs.len()),
    };
    let zero = vec![T::zero(); h];
    for x in xs {
        debug_assert_eq!(x.len(), n_in);
        let h_prev = cache.hidden.last().unwrap_or(&zero);
        let c_prev = cache.cells.last().unwrap_or(&zero);
        let mut input = Vec::with_capacity(w.cols);
        input.extend_from_slice(x);
        input.extend_from_slice(h_prev);
        let mut z = vec![T::zero(); 4 * h];
        w.affine(&input, &b.data, &mut z);
        for k in 0..h {
            z[k] = super::tensor::sigmoid(z[k]);
            z[h + k] = super::tensor::sigmoid(z[h + k]);
            z[2 * h + k] = z[2 * h + k].tanh();
            z[3 * h + k] = super::tensor::sigmoid(z[3 * h + k]);
        }
        let mut c = vec![T::zero(); h];
        let mut hid = vec![T::zero(); h];
        for k in 0..h {
            c[k] = z[h + k] * c_prev[k] + z[k] * z[2 * h + k];
            hid[k] = z[3 * h + k] * c[k].tanh();
        }
        cache.inputs.push(input);
        cache.gates.push(z);
        cache.cells.push(c);
        cache.hidden.push(hid);
    }
    cache
}

/// Backpropagates `d_hidden` (one gradient per step) through the sequence.
/// Accumulates into `gw`/`gb` and returns the gradient for every input.
pub fn backward<T: Scalar>(
    w: &Tensor<T>,
    cache: &LstmCache<T>,
    d_hidden: &[Vec<T>],
    gw: &mut Tensor<T>,
    gb: &mut Tensor<T>,
) -> Vec<Vec<T>> {
    let h = w.rows / 4;
    let n_in = w.cols - h;
    let steps = cache.hidden.len();
    let mut dxs = vec![Vec::new(); steps];
    let mut dh_next = vec![T::zero(); h];
    let mut dc_next = vec![T::zero(); h];
    let zero = vec![T::zero(); h];
    let mut dz = vec![T::zero(); 4 * h];
    for t in (0..steps).rev() {
        let g = &cache.gates[t];
        let c = &cache.cells[t];
        let c_prev = if t > 0 { &cache.cells[t - 1] } else { &zero };
        for k in 0..h {
            let (i, f, cand, o) = (g[k], g[h + k], g[2 * h + k], g[3 * h + k]);
            let dh = d_hidden[t][k] + dh_next[k];
            let tc = c[k].tanh();
            let dc = dc_next[k] + dh * o * (T::one() - tc * tc);
            dz[k] = dc * cand * i * (T::one() - i);
            dz[h + k] = dc * c_prev[k] * f * (T::one() - f);
            dz[2 * h + k] = dc * i * (T::one() - cand * cand);
            dz[3 * h + k] = dh * tc * o * (T::one() - o);
            dc_next[k] = dc * f;
        }
        gw.add_outer(&dz, &cache.inputs[t]);
        super::tensor::add_into(&dz, &mut gb.data);
        let mut d_input = vec![T::zero(); w.cols];
        w.backprop_input(&dz, &mut d_input);
        dh_next.copy_from_slice(&d_input[n_in..]);
        d_input.truncate(n_in);
        dxs[t] = d_input;
    }
    dxs
}
