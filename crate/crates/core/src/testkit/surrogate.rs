//! Surrogate-simulation p-value: the null distribution of `T_κ` estimated by simulating
//! independent fGn pairs instead of using tabulated asymptotics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::test_statistic;
use crate::error::{DccaError, Result};
use crate::fbm::FbmParams;
use crate::fluctuation::FluctuationSet;
use crate::simulate::{replicate_seed, BfgnGenerator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateResult {
    pub statistic: f64,
    pub p_value: f64,
    pub replicates: usize,
}

/// `(1 + #{T_s ≥ T_obs}) / (1 + reps)` with coefficients standardized by their
/// surrogate standard deviations per scale.
pub fn surrogate_pvalue(
    observed: &FluctuationSet,
    h: f64,
    g: f64,
    kappa: usize,
    reps: usize,
    seed: u64,
) -> Result<SurrogateResult> {
    if reps < 2 {
        return Err(DccaError::InvalidParameter("need at least two surrogates".into()));
    }
    let scales = &observed.scales;
    let generator = BfgnGenerator::new(scales.series_len(), &FbmParams::null(h, g))?;
    let rhos: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let pair = generator.generate(replicate_seed(seed, i as u64))?;
            Ok(FluctuationSet::compute(&pair, scales)?.rho)
        })
        .collect::<Result<_>>()?;
    let r = scales.len();
    let sd: Vec<f64> = (0..r)
        .map(|i| {
            let m = rhos.iter().map(|v| v[i]).sum::<f64>() / reps as f64;
            (rhos.iter().map(|v| (v[i] - m).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt()
        })
        .collect();
    let stat = |rho: &[f64]| -> Result<f64> {
        let z: Vec<f64> = rho.iter().zip(&sd).map(|(a, s)| a / s).collect();
        Ok(test_statistic(&z, kappa)?.0)
    };
    let t_obs = stat(&observed.rho)?;
    let mut above = 0usize;
    for rho in &rhos {
        if stat(rho)? >= t_obs {
            above += 1;
        }
    }
    Ok(SurrogateResult { statistic: t_obs, p_value: (1 + above) as f64 / (1 + reps) as f64, replicates: reps })
}
