//! Rename resolution against the GitHub REST API.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Duration;

use serde::Deserialize;
use usagescan_core::RepoLookup;

pub const DEFAULT_API: &str = "https://api.github.com";

#[derive(Deserialize)]
struct Repo {
    full_name: String,
}

/// Resolves `github.com/owner/name` keys to the repository's current
/// name. Other hosts resolve to themselves. Answers are cached per run.
pub struct GithubLookup {
    agent: ureq::Agent,
    api: String,
    token: Option<String>,
    cache: Mutex<HashMap<String, Result<String, String>>>,
}

impl GithubLookup {
    pub fn new(api: impl Into<String>, token: Option<String>, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder().timeout_global(Some(timeout)).build();
        GithubLookup {
            agent: ureq::Agent::new_with_config(config),
            api: api.into().trim_end_matches('/').to_string(),
            token,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// API base from `USAGESCAN_GITHUB_API`, token from `GITHUB_TOKEN`.
    pub fn from_env(timeout: Duration) -> Self {
        let api = std::env::var("USAGESCAN_GITHUB_API").unwrap_or_else(|_| DEFAULT_API.to_string());
        GithubLookup::new(api, std::env::var("GITHUB_TOKEN").ok().filter(|t| !t.is_empty()), timeout)
    }

    fn fetch(&self, owner_name: &str) -> Result<String, String> {
        let mut req = self
            .agent
            .get(format!("{}/repos/{owner_name}", self.api))
            .header("Accept", "application/vnd.github+json")
            .header("User-Agent", concat!("usagescan/", env!("CARGO_PKG_VERSION")));
        if let Some(t) = &self.token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        let mut resp = req.call().map_err(|e| e.to_string())?;
        let repo: Repo = resp.body_mut().read_json().map_err(|e| e.to_string())?;
        Ok(format!("github.com/{}", repo.full_name.to_lowercase()))
    }
}

impl RepoLookup for GithubLookup {
    fn resolve(&self, key: &str) -> Result<String, String> {
        let Some(owner_name) = key.strip_prefix("github.com/") else {
            return Ok(key.to_string());
        };
        if let Some(hit) = self.cache.lock().expect("cache lock").get(key) {
            return hit.clone();
        }
        let answer = self.fetch(owner_name);
        log::debug!("lookup {key}: {answer:?}");
        self.cache.lock().expect("cache lock").insert(key.to_string(), answer.clone());
        answer
    }
}
