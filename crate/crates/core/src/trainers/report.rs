use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Stationary,
    Budget,
}

/// Full-batch training losses after an epoch, and the mean weight the black-box
/// update put on the predictive gradient during it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub l_pred: f64,
    pub l_pf: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalMetrics {
    /// `f1` or `mse`
    pub task_metric_name: String,
    /// Task metric on the test split.
    pub task_metric: f64,
    /// Global fidelity on the test split; absent for the linear baseline.
    pub gf: Option<f64>,
    pub gnf: Option<f64>,
    pub train_l_pred: f64,
    pub train_l_pf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub method: String,
    pub seed: u64,
    pub epochs_run: usize,
    pub stopped_reason: StopReason,
    pub history: Vec<EpochRecord>,
    pub final_metrics: FinalMetrics,
    /// Steps used by the post-hoc surrogate fit (STL only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate_fit_steps: Option<usize>,
}

impl TrainReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn alpha_trace(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.alpha).collect()
    }
}
