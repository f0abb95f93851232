use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

/// A JSON POST endpoint with bounded retries.
#[derive(Debug, Clone)]
pub(crate) struct JsonEndpoint {
    agent: ureq::Agent,
    url: String,
    bearer: Option<String>,
    retries: u32,
    backoff: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{url} failed after {attempts} attempt(s): {message}")]
pub struct HttpError {
    pub url: String,
    pub attempts: u32,
    pub message: String,
}

impl JsonEndpoint {
    pub fn new(url: &str, timeout: Duration, retries: u32, bearer: Option<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        JsonEndpoint {
            agent,
            url: url.to_string(),
            bearer,
            retries,
            backoff: Duration::from_millis(500),
        }
    }

    pub fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        body: &Req,
    ) -> Result<Resp, HttpError> {
        let mut attempt = 0;
        loop {
            attempt += 1;
            let mut req = self.agent.post(&self.url);
            if let Some(token) = &self.bearer {
                req = req.header("Authorization", format!("Bearer {token}"));
            }
            let result = req
                .send_json(body)
                .and_then(|mut resp| resp.body_mut().read_json::<Resp>());
            let err = match result {
                Ok(v) => return Ok(v),
                Err(e) => e,
            };
            let retryable = match &err {
                ureq::Error::StatusCode(code) => *code == 429 || *code >= 500,
                ureq::Error::Json(_) => false,
                _ => true,
            };
            if !retryable || attempt > self.retries {
                return Err(HttpError {
                    url: self.url.clone(),
                    attempts: attempt,
                    message: err.to_string(),
                });
            }
            std::thread::sleep(self.backoff * 2u32.pow(attempt - 1));
        }
    }
}
