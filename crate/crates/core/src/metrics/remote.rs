//! HTTP client for an external scorer service.
//!
//! Protocol:
//! - `POST /similarity` `{"hypothesis": s, "references": [s]}` → `{"score": x}`
//! - `POST /fluency` `{"sentence": s}` → `{"error_probability": x}`
//! - `GET /healthz` → 200
//!
//! Timeouts, transport failures, non-200 statuses and malformed bodies all
//! surface as [`Error::Backend`].

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::fense::{FluencyBackend, SimilarityBackend};
use crate::error::{Error, Result};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Serialize)]
struct SimilarityRequest<'a> {
    hypothesis: &'a str,
    references: &'a [String],
}

#[derive(Deserialize)]
struct SimilarityResponse {
    score: f64,
}

#[derive(Serialize)]
struct FluencyRequest<'a> {
    sentence: &'a str,
}

#[derive(Deserialize)]
struct FluencyResponse {
    error_probability: f64,
}

#[derive(Debug, Clone)]
pub struct RemoteScorer {
    base_url: String,
    agent: ureq::Agent,
}

impl RemoteScorer {
    pub fn new(base_url: impl Into<String>, timeout: Duration) -> Self {
        let base_url = base_url.into().trim_end_matches('/').to_owned();
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        RemoteScorer { base_url, agent }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn health_check(&self) -> Result<()> {
        let url = format!("{}/healthz", self.base_url);
        let resp = self.agent.get(&url).call().map_err(|e| backend(&url, e))?;
        if resp.status() != 200 {
            return Err(Error::Backend(format!("{url}: status {}", resp.status())));
        }
        Ok(())
    }

    fn post<Req: Serialize, Resp: for<'de> Deserialize<'de>>(&self, path: &str, body: &Req) -> Result<Resp> {
        let url = format!("{}{path}", self.base_url);
        let mut resp = self.agent.post(&url).send_json(body).map_err(|e| backend(&url, e))?;
        if resp.status() != 200 {
            return Err(Error::Backend(format!("{url}: status {}", resp.status())));
        }
        resp.body_mut().read_json().map_err(|e| backend(&url, e))
    }
}

fn backend(url: &str, e: ureq::Error) -> Error {
    Error::Backend(format!("{url}: {e}"))
}

impl SimilarityBackend for RemoteScorer {
    fn similarity(&self, hypothesis: &str, references: &[String]) -> Result<f64> {
        let resp: SimilarityResponse = self.post("/similarity", &SimilarityRequest { hypothesis, references })?;
        if !resp.score.is_finite() || !(-1.0..=1.0).contains(&resp.score) {
            return Err(Error::Backend(format!("similarity {} outside [-1, 1]", resp.score)));
        }
        Ok(resp.score)
    }
}

impl FluencyBackend for RemoteScorer {
    fn error_probability(&self, sentence: &str) -> Result<f64> {
        let resp: FluencyResponse = self.post("/fluency", &FluencyRequest { sentence })?;
        if !(0.0..=1.0).contains(&resp.error_probability) {
            return Err(Error::Backend(format!(
                "error probability {} outside [0, 1]",
                resp.error_probability
            )));
        }
        Ok(resp.error_probability)
    }
}
