use std::collections::VecDeque;

use crate::ltisys::TransferFunction;

/// Direct-form recurrence of a transfer function with zero initial state:
/// `y_k = -sum a_i y_{k-i} + sum b_i u_{k-D-i}` with `D` the total input lag.
#[derive(Debug, Clone)]
pub struct Recurrence {
    /// Denominator coefficients after the leading 1.
    a: Vec<f64>,
    b: Vec<f64>,
    lag: usize,
    inputs: VecDeque<f64>,
    outputs: VecDeque<f64>,
}

impl Recurrence {
    pub fn new(g: &TransferFunction) -> Self {
        let den = g.den();
        let num = g.num();
        let lag = den.len() + g.delay() as usize - num.len();
        let inputs = VecDeque::from(vec![0.0; lag + num.len()]);
        let outputs = VecDeque::from(vec![0.0; den.len() - 1]);
        Self {
            a: den[1..].to_vec(),
            b: num.to_vec(),
            lag,
            inputs,
            outputs,
        }
    }

    /// Samples between an input and its first effect on the output.
    pub fn lag(&self) -> usize {
        self.lag
    }

    /// Output at the current instant if the current input were `u`, without
    /// advancing. For `lag() >= 1` the value does not depend on `u`.
    pub fn peek(&self, u: f64) -> f64 {
        // inputs[0] is u_{k-1}; index i of the lagged term is u_{k-lag-i}
        let mut y = 0.0;
        for (i, &b) in self.b.iter().enumerate() {
            let back = self.lag + i;
            let x = if back == 0 { u } else { self.inputs[back - 1] };
            y += b * x;
        }
        for (a, yy) in self.a.iter().zip(&self.outputs) {
            y -= a * yy;
        }
        y
    }

    pub fn step(&mut self, u: f64) -> f64 {
        let y = self.peek(u);
        self.inputs.pop_back();
        self.inputs.push_front(u);
        if !self.a.is_empty() {
            self.outputs.pop_back();
            self.outputs.push_front(y);
        }
        y
    }

    pub fn reset(&mut self) {
        self.inputs.iter_mut().for_each(|x| *x = 0.0);
        self.outputs.iter_mut().for_each(|x| *x = 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folded_pole_at_origin() {
        // (z - 1) / z is stored as (1 - z^-1) with one sample of delay
        let g = TransferFunction::new(&[1.0, -1.0], &[1.0, 0.0], 0, 1.0).unwrap();
        let mut r = Recurrence::new(&g);
        assert_eq!(r.lag(), 0);
        let y: Vec<f64> = [1.0, 1.0, 1.0].iter().map(|&u| r.step(u)).collect();
        assert_eq!(y, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn pure_delay_shifts_impulse() {
        let g = TransferFunction::delay_only(3, 1.0).unwrap();
        let mut r = Recurrence::new(&g);
        let y: Vec<f64> = (0..6)
            .map(|k| r.step(if k == 0 { 1.0 } else { 0.0 }))
            .collect();
        assert_eq!(y, [0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn first_order_step_converges() {
        let g = TransferFunction::new(&[1.0], &[1.0, -0.5], 0, 1.0).unwrap();
        let mut r = Recurrence::new(&g);
        assert_eq!(r.lag(), 1);
        let mut y = 0.0;
        for _ in 0..60 {
            y = r.step(1.0);
        }
        assert!((y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn biproper_feedthrough() {
        let g = TransferFunction::new(&[2.0, -1.0], &[1.0, -1.0], 0, 1.0).unwrap();
        let mut r = Recurrence::new(&g);
        assert_eq!(r.peek(3.0), 6.0);
        assert_eq!(r.step(1.0), 2.0);
        // 2 u_k - u_{k-1} + y_{k-1}
        assert_eq!(r.step(0.0), -1.0 + 2.0);
    }
}
