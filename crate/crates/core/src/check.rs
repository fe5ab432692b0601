use alloc::string::String;

/// One verdict line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub parameter: String,
    pub theoretical: Option<f64>,
    pub empirical: f64,
    pub band_low: f64,
    pub band_high: f64,
    pub pass: bool,
}

impl CheckRow {
    /// Row that passes iff `band_low <= empirical <= band_high`.
    pub fn banded(
        check: impl Into<String>,
        parameter: impl Into<String>,
        theoretical: Option<f64>,
        empirical: f64,
        band_low: f64,
        band_high: f64,
    ) -> Self {
        let pass = empirical >= band_low && empirical <= band_high;
        Self { check: check.into(), parameter: parameter.into(), theoretical, empirical, band_low, band_high, pass }
    }

    /// Row for `|empirical - theoretical| <= tol`.
    pub fn within(check: impl Into<String>, parameter: impl Into<String>, theoretical: f64, empirical: f64, tol: f64) -> Self {
        Self::banded(check, parameter, Some(theoretical), empirical, theoretical - tol, theoretical + tol)
    }
}
