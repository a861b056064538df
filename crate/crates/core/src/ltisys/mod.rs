//! Discrete-time LTI machinery: transfer-function algebra, poles, frequency
//! response, infinity norm and the filtered Smith predictor loop maps.

pub mod freq;
pub mod fsp;
pub mod poly;
pub mod roots;
pub mod tf;

pub use freq::{frequency_response, inf_norm, peak_magnitude, FrequencyResponse, InfNorm};
pub use fsp::{build_m, design_example, design_fsp, ExampleSystem, SmithPredictorDesign};
pub use tf::{NearCancellation, TfRecord, TransferFunction};
