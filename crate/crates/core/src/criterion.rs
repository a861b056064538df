//! Small-gain verdict: `||M||_inf * alpha* < 1` with the nominal loop designed
//! for `tau_hat = d_hat + tau_lo + tau_a*`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ltisys::freq::{uniform_grid, GRID_POINTS};
use crate::ltisys::{build_m, design_fsp, inf_norm, TransferFunction};
use crate::uncertainty::{
    default_t_max, optimal_p1, optimal_p3, overestimate_p3, shift_gain, Protocol,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControllerSpec {
    /// Fixed single-block controller acting on the received output.
    Direct { r: TransferFunction },
    /// Filtered Smith predictor, redesigned for every nominal delay.
    SmithPredictor {
        c: TransferFunction,
        filter_pole: f64,
    },
}

impl ControllerSpec {
    /// Equivalent controller `R` for nominal delay `tau_hat`.
    pub fn controller(&self, p_hat: &TransferFunction, tau_hat: u32) -> Result<TransferFunction> {
        match self {
            ControllerSpec::Direct { r } => Ok(r.clone()),
            ControllerSpec::SmithPredictor { c, filter_pole } => {
                Ok(design_fsp(c, p_hat, tau_hat, *filter_pole)?.r)
            }
        }
    }
}

/// How the acausal shift and uncertainty gain are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CriterionOptions {
    /// Force `tau_a = 0`.
    pub causal: bool,
    /// Use `tau_a = span`, `alpha = span` instead of the P3 optimum.
    pub overestimate: bool,
    /// Truncation sweep limit for P3; `None` picks the default for the span.
    pub t_max: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub protocol: Protocol,
    pub tau_lo: u32,
    pub tau_hi: u32,
    pub tau_hat_n: u32,
    pub tau_a_star: u32,
    pub alpha_star: f64,
    /// Nominal delay the controller is designed for.
    pub tau_hat: u32,
    pub m_inf_norm: f64,
    pub omega_peak: f64,
    pub product: f64,
    pub verdict: bool,
    pub margin: f64,
}

/// Acausal shift and uncertainty gain for a span under the given options.
pub fn uncertainty_gain(
    protocol: Protocol,
    span: u32,
    opts: &CriterionOptions,
) -> Result<(u32, f64)> {
    if span == 0 {
        return Err(Error::InvalidArgument(
            "delay span must be at least 1".into(),
        ));
    }
    if opts.causal && opts.overestimate {
        return Err(Error::InvalidArgument(
            "causal and overestimate modes are exclusive".into(),
        ));
    }
    let t_max = opts.t_max.unwrap_or_else(|| default_t_max(span));
    Ok(match (protocol, opts.causal, opts.overestimate) {
        (_, _, true) => overestimate_p3(span),
        (Protocol::P1, true, _) => (0, span as f64),
        (Protocol::P1, false, _) => optimal_p1(span),
        (Protocol::P3, true, _) => (0, shift_gain(Protocol::P3, span, 0, t_max).alpha),
        (Protocol::P3, false, _) => {
            let r = optimal_p3(span, t_max)?;
            (r.tau_a_star, r.alpha_star)
        }
    })
}

/// Nominal map `M` for the given shift, plus the nominal delay used.
pub fn nominal_map(
    plant: &TransferFunction,
    spec: &ControllerSpec,
    tau_lo: u32,
    tau_a: u32,
) -> Result<(TransferFunction, u32)> {
    let p_hat = plant.without_delay();
    let tau_hat = plant.delay() + tau_lo + tau_a;
    let r = spec.controller(&p_hat, tau_hat)?;
    Ok((build_m(&r, &p_hat, tau_hat)?, tau_hat))
}

/// `plant` includes its dead time `d_hat` as the delay factor.
pub fn check_stability(
    plant: &TransferFunction,
    spec: &ControllerSpec,
    tau_lo: u32,
    tau_hi: u32,
    protocol: Protocol,
    opts: &CriterionOptions,
) -> Result<StabilityReport> {
    if tau_lo >= tau_hi {
        return Err(Error::DelayBounds {
            lo: tau_lo,
            hi: tau_hi,
        });
    }
    let span = tau_hi - tau_lo;
    let (tau_a_star, alpha_star) = uncertainty_gain(protocol, span, opts)?;
    let (m, tau_hat) = nominal_map(plant, spec, tau_lo, tau_a_star)?;
    let norm = inf_norm(&m).map_err(|e| match e {
        Error::Unstable { max_pole_magnitude } => Error::NominalUnstable {
            tau_hat,
            max_pole_magnitude,
        },
        other => other,
    })?;
    let product = norm.norm * alpha_star;
    Ok(StabilityReport {
        protocol,
        tau_lo,
        tau_hi,
        tau_hat_n: span,
        tau_a_star,
        alpha_star,
        tau_hat,
        m_inf_norm: norm.norm,
        omega_peak: norm.omega,
        product,
        verdict: product < 1.0,
        margin: 1.0 - product,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub tau_hat_n: u32,
    pub report: Option<StabilityReport>,
    /// Why no verdict could be given (e.g. unstable nominal loop).
    pub error: Option<String>,
}

impl ScanEntry {
    pub fn stable(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.verdict)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayScan {
    pub protocol: Protocol,
    pub tau_lo: u32,
    pub entries: Vec<ScanEntry>,
    /// Largest span such that every span from 1 up to it is certified.
    pub max_admissible: u32,
    /// Certified spans beyond the first failing one.
    pub gaps: Vec<u32>,
}

/// Checks every span in `1..=cap`.
pub fn max_admissible_delay(
    plant: &TransferFunction,
    spec: &ControllerSpec,
    tau_lo: u32,
    protocol: Protocol,
    cap: u32,
    opts: &CriterionOptions,
) -> Result<DelayScan> {
    if cap == 0 {
        return Err(Error::InvalidArgument("span cap must be at least 1".into()));
    }
    let eval = |span: u32| match check_stability(plant, spec, tau_lo, tau_lo + span, protocol, opts)
    {
        Ok(r) => ScanEntry {
            tau_hat_n: span,
            report: Some(r),
            error: None,
        },
        Err(e) => ScanEntry {
            tau_hat_n: span,
            report: None,
            error: Some(e.to_string()),
        },
    };
    #[cfg(feature = "parallel")]
    let entries: Vec<ScanEntry> = {
        use rayon::prelude::*;
        (1..=cap).into_par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let entries: Vec<ScanEntry> = (1..=cap).map(eval).collect();

    let max_admissible = entries.iter().take_while(|e| e.stable()).count() as u32;
    let gaps = entries
        .iter()
        .skip(max_admissible as usize)
        .filter(|e| e.stable())
        .map(|e| e.tau_hat_n)
        .collect();
    Ok(DelayScan {
        protocol,
        tau_lo,
        entries,
        max_admissible,
        gaps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodeCurve {
    pub tau_hat_n: u32,
    pub omegas: Vec<f64>,
    /// `|M(e^{j w h})| * alpha*`.
    pub magnitudes: Vec<f64>,
    pub peak: f64,
    pub report: StabilityReport,
}

/// Scaled magnitude curves whose peak is the small-gain product. The grid is
/// the norm grid with the refined peak frequency inserted.
pub fn bode_margin_data(
    plant: &TransferFunction,
    spec: &ControllerSpec,
    tau_lo: u32,
    protocol: Protocol,
    spans: &[u32],
    opts: &CriterionOptions,
) -> Result<Vec<BodeCurve>> {
    spans
        .iter()
        .map(|&span| {
            let report = check_stability(plant, spec, tau_lo, tau_lo + span, protocol, opts)?;
            let (m, _) = nominal_map(plant, spec, tau_lo, report.tau_a_star)?;
            let mut omegas = uniform_grid(plant.sample_time(), GRID_POINTS);
            let pos = omegas.partition_point(|&w| w < report.omega_peak);
            if omegas.get(pos) != Some(&report.omega_peak) {
                omegas.insert(pos, report.omega_peak);
            }
            let magnitudes: Vec<f64> = omegas
                .iter()
                .map(|&w| m.freq(w).norm() * report.alpha_star)
                .collect();
            let peak = magnitudes.iter().copied().fold(0.0, f64::max);
            Ok(BodeCurve {
                tau_hat_n: span,
                omegas,
                magnitudes,
                peak,
                report,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltisys::design_example;

    fn example() -> (TransferFunction, ControllerSpec) {
        let ex = design_example();
        let spec = ControllerSpec::SmithPredictor {
            c: ex.c.clone(),
            filter_pole: ex.filter_pole,
        };
        (ex.plant(), spec)
    }

    #[test]
    fn report_is_consistent() {
        let (plant, spec) = example();
        let r = check_stability(
            &plant,
            &spec,
            0,
            6,
            Protocol::P1,
            &CriterionOptions::default(),
        )
        .unwrap();
        assert_eq!(r.product, r.m_inf_norm * r.alpha_star);
        assert_eq!(r.verdict, r.product < 1.0);
        assert_eq!((r.tau_a_star, r.tau_hat), (3, 8));
        assert!(r.verdict);
    }

    #[test]
    fn rejects_bad_options() {
        let (plant, spec) = example();
        let both = CriterionOptions {
            causal: true,
            overestimate: true,
            t_max: None,
        };
        assert!(check_stability(&plant, &spec, 0, 2, Protocol::P3, &both).is_err());
        assert!(check_stability(&plant, &spec, 2, 2, Protocol::P3, &Default::default()).is_err());
    }

    #[test]
    fn zero_controller_curve_is_zero() {
        let plant = TransferFunction::new(&[0.5], &[1.0, -0.5], 2, 1.0).unwrap();
        let spec = ControllerSpec::Direct {
            r: TransferFunction::zero(1.0).unwrap(),
        };
        let curves =
            bode_margin_data(&plant, &spec, 0, Protocol::P1, &[1, 2], &Default::default()).unwrap();
        for c in curves {
            assert!(c.magnitudes.iter().all(|&m| m == 0.0));
            assert!(c.report.verdict);
        }
    }

    #[test]
    fn unstable_nominal_loop_reported() {
        let plant = TransferFunction::new(&[1.0], &[1.0, -0.5], 1, 1.0).unwrap();
        let spec = ControllerSpec::Direct {
            r: TransferFunction::gain(5.0, 1.0).unwrap(),
        };
        let err = check_stability(&plant, &spec, 0, 1, Protocol::P1, &Default::default());
        assert!(matches!(err, Err(Error::NominalUnstable { .. })));
    }
}
