//! LSTM cell composed from tape primitives.
//!
//! Standard gate formulation with the [i, f, g, o] packing:
//! i = σ(·), f = σ(·), g = tanh(·), o = σ(·),
//! c' = f⊙c + i⊙g, h' = o⊙tanh(c').

use super::{Tape, Tensor, Var};

/// Parameters of one LSTM layer: `w_ih: [I, 4H]`, `w_hh: [H, 4H]`, `b: [4H]`.
#[derive(Debug, Clone, Copy)]
pub struct LstmParams {
    pub w_ih: Var,
    pub w_hh: Var,
    pub b: Var,
    pub hidden: usize,
}

/// Recurrent state: `h` and `c`, both `[B, H]`.
#[derive(Debug, Clone, Copy)]
pub struct LstmState {
    pub h: Var,
    pub c: Var,
}

impl LstmState {
    pub fn zeros(tape: &mut Tape, batch: usize, hidden: usize) -> Self {
        let h = tape.input(Tensor::zeros(&[batch, hidden]));
        let c = tape.input(Tensor::zeros(&[batch, hidden]));
        Self { h, c }
    }
}

/// One LSTM step on `x: [B, I]`. Shape agreement is the caller's contract.
pub fn lstm_step(tape: &mut Tape, x: Var, state: &LstmState, params: &LstmParams) -> LstmState {
    let hidden = params.hidden;
    let from_x = tape.dense(x, params.w_ih, Some(params.b)).expect("lstm input shapes");
    let from_h = tape.dense(state.h, params.w_hh, None).expect("lstm hidden shapes");
    let gates = tape.add(from_x, from_h);

    let i_raw = tape.slice_time(gates, 0, hidden);
    let f_raw = tape.slice_time(gates, hidden, 2 * hidden);
    let g_raw = tape.slice_time(gates, 2 * hidden, 3 * hidden);
    let o_raw = tape.slice_time(gates, 3 * hidden, 4 * hidden);

    let i = tape.sigmoid(i_raw);
    let f = tape.sigmoid(f_raw);
    let g = tape.tanh(g_raw);
    let o = tape.sigmoid(o_raw);

    let fc = tape.mul(f, state.c);
    let ig = tape.mul(i, g);
    let c_next = tape.add(fc, ig);
    let c_act = tape.tanh(c_next);
    let h_next = tape.mul(o, c_act);
    LstmState { h: h_next, c: c_next }
}

/// Unroll an LSTM layer over `x: [B, T, C]`, producing `[B, T, H]`.
pub fn lstm_sequence(tape: &mut Tape, x: Var, params: &LstmParams) -> Var {
    let shape = tape.value(x).shape().to_vec();
    assert_eq!(shape.len(), 3, "lstm_sequence needs [B,T,C]");
    let (batch, steps, channels) = (shape[0], shape[1], shape[2]);
    let mut state = LstmState::zeros(tape, batch, params.hidden);
    let mut outputs = Vec::with_capacity(steps);
    for t in 0..steps {
        let xt3 = tape.slice_time(x, t, t + 1);
        let xt = tape.reshape(xt3, &[batch, channels]);
        state = lstm_step(tape, xt, &state, params);
        outputs.push(tape.reshape(state.h, &[batch, 1, params.hidden]));
    }
    tape.concat_time(&outputs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(tape: &mut Tape, input: usize, hidden: usize, fill: f64) -> LstmParams {
        let w_ih = tape.input(Tensor::filled(&[input, 4 * hidden], fill));
        let w_hh = tape.input(Tensor::filled(&[hidden, 4 * hidden], fill));
        let b = tape.input(Tensor::filled(&[4 * hidden], fill));
        LstmParams { w_ih, w_hh, b, hidden }
    }

    #[test]
    fn zero_params_zero_state_stay_zero() {
        let mut tape = Tape::new(0);
        let p = params(&mut tape, 2, 3, 0.0);
        let state = LstmState::zeros(&mut tape, 1, 3);
        let x = tape.input(Tensor::from_vec(&[1, 2], vec![0.5, -0.5]));
        let next = lstm_step(&mut tape, x, &state, &p);
        assert!(tape.value(next.h).data().iter().all(|&v| v == 0.0));
        assert!(tape.value(next.c).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn all_ones_matches_hand_computation() {
        // 1 input, 1 hidden, every weight/bias/input 1, zero state:
        // every gate preactivation is 2 (x*1 + b, h=0),
        // i=f=o=sigmoid(2), g=tanh(2), c'=i*g, h'=o*tanh(c').
        let mut tape = Tape::new(0);
        let p = params(&mut tape, 1, 1, 1.0);
        let state = LstmState::zeros(&mut tape, 1, 1);
        let x = tape.input(Tensor::from_vec(&[1, 1], vec![1.0]));
        let next = lstm_step(&mut tape, x, &state, &p);

        let sig2 = 1.0 / (1.0 + (-2.0f64).exp());
        let c_expect = sig2 * 2.0f64.tanh();
        let h_expect = sig2 * c_expect.tanh();
        assert!((tape.value(next.c).data()[0] - c_expect).abs() < 1e-10);
        assert!((tape.value(next.h).data()[0] - h_expect).abs() < 1e-10);
    }

    #[test]
    fn sequence_output_shape() {
        let mut tape = Tape::new(0);
        let p = params(&mut tape, 3, 4, 0.1);
        let x = tape.input(Tensor::filled(&[2, 5, 3], 0.2));
        let y = lstm_sequence(&mut tape, x, &p);
        assert_eq!(tape.value(y).shape(), &[2, 5, 4]);
    }
}
