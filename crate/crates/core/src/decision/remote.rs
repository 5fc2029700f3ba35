//! Blocking client for an external decision service.
//!
//! `POST {endpoint}/decide` with `{"topology": "...", "goal_bearing_deg": x}`; the reply must carry
//! `Reasoning`, `Drive Plan` and `Drive Style`.

use std::io::{self, Read};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{rule_decide, DecisionError, Directive, DirectivePlan, DriveStyle, RuleConfig};
use crate::worldmodel::{serialize_topology, TopologyGraph};

pub const DECISION_URL_ENV: &str = "AFSP_DECISION_URL";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecideRequest {
    pub topology: String,
    pub goal_bearing_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecideReply {
    #[serde(rename = "Reasoning")]
    pub reasoning: String,
    #[serde(rename = "Drive Plan")]
    pub drive_plan: Vec<String>,
    #[serde(rename = "Drive Style")]
    pub drive_style: String,
}

impl DecideReply {
    fn into_plan(self, raw: &str) -> Result<DirectivePlan, DecisionError> {
        let schema = |message: String| DecisionError::Schema {
            message,
            raw: raw.to_string(),
        };
        let directives = self
            .drive_plan
            .iter()
            .map(|t| t.parse::<Directive>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| schema(e.to_string()))?;
        let style: DriveStyle = self.drive_style.parse().map_err(|e: DecisionError| schema(e.to_string()))?;
        Ok(DirectivePlan {
            reasoning: self.reasoning,
            directives,
            style,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RemoteDecider {
    endpoint: String,
    timeout: Duration,
}

impl RemoteDecider {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        Self {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            timeout,
        }
    }

    /// Reads the endpoint from `AFSP_DECISION_URL`; `None` when unset or empty.
    pub fn from_env(timeout: Duration) -> Option<Self> {
        std::env::var(DECISION_URL_ENV)
            .ok()
            .filter(|u| !u.trim().is_empty())
            .map(|u| Self::new(u, timeout))
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// Sends the serialized topology and parses the structured reply.
    pub fn decide(&self, graph: &TopologyGraph, goal_bearing: f64) -> Result<DirectivePlan, DecisionError> {
        let request = DecideRequest {
            topology: serialize_topology(graph),
            goal_bearing_deg: goal_bearing,
        };
        let body = serde_json::to_string(&request).expect("request serializes");
        let agent = ureq::AgentBuilder::new().timeout(self.timeout).build();
        let url = format!("{}/decide", self.endpoint);
        let timeout_s = self.timeout.as_secs_f64();
        let response = match agent
            .post(&url)
            .set("Content-Type", "application/json")
            .send_string(&body)
        {
            Ok(r) => r,
            Err(ureq::Error::Status(code, r)) => {
                let raw = r.into_string().ok();
                return Err(DecisionError::Transport {
                    message: format!("HTTP {code}"),
                    raw,
                });
            }
            Err(ureq::Error::Transport(t)) => {
                if is_timeout(&t) {
                    return Err(DecisionError::Timeout { timeout_s });
                }
                return Err(DecisionError::Transport {
                    message: t.to_string(),
                    raw: None,
                });
            }
        };
        let mut raw = String::new();
        if let Err(e) = response.into_reader().read_to_string(&mut raw) {
            if matches!(e.kind(), io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock) {
                return Err(DecisionError::Timeout { timeout_s });
            }
            return Err(DecisionError::Transport {
                message: e.to_string(),
                raw: Some(raw),
            });
        }
        parse_reply(&raw)
    }
}

fn is_timeout(t: &ureq::Transport) -> bool {
    let text = t.to_string().to_ascii_lowercase();
    text.contains("timed out") || text.contains("timeout") || text.contains("would block")
}

/// Parses a reply body into a plan; any schema violation keeps the raw text.
pub fn parse_reply(raw: &str) -> Result<DirectivePlan, DecisionError> {
    let reply: DecideReply = serde_json::from_str(raw).map_err(|e| DecisionError::Schema {
        message: e.to_string(),
        raw: raw.to_string(),
    })?;
    reply.into_plan(raw)
}

/// Uses the remote service when configured and falls back to the rule engine on any error.
pub fn decide_with_fallback(
    remote: Option<&RemoteDecider>,
    graph: &TopologyGraph,
    goal_bearing: f64,
    rules: &RuleConfig,
) -> DirectivePlan {
    if let Some(client) = remote {
        match client.decide(graph, goal_bearing) {
            Ok(plan) => return plan,
            Err(e) => log::warn!("decision service {} failed, using rules: {e}", client.endpoint()),
        }
    }
    rule_decide(graph, goal_bearing, rules)
}
