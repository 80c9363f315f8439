//! Static personalized recommendation pages.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use url::Url;

use crate::error::{Error, Result};
use crate::matcher::MatchResult;
use crate::profiles::{CandidateRecord, StudentRecord};

pub const DEFAULT_PROFILE_BASE_URL: &str = "https://www.linkedin.com/in/";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PageOptions {
    pub survey_url: Option<String>,
    /// Profile links for candidates without an explicit `profile_url` are this
    /// base with the candidate id appended as a path segment.
    pub profile_base_url: String,
}

impl Default for PageOptions {
    fn default() -> Self {
        Self {
            survey_url: None,
            profile_base_url: DEFAULT_PROFILE_BASE_URL.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PageEntry {
    pub display_name: String,
    pub profile_url: String,
    pub industry: String,
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PageSpec {
    pub student_id: String,
    pub greeting_name: String,
    pub entries: Vec<PageEntry>,
    pub survey_url: Option<String>,
}

fn checked_url(raw: &str) -> Result<Url> {
    let url = Url::parse(raw).map_err(|e| Error::Url {
        url: raw.to_owned(),
        reason: e.to_string(),
    })?;
    if !matches!(url.scheme(), "http" | "https") || url.host_str().is_none() {
        return Err(Error::Url {
            url: raw.to_owned(),
            reason: "expected an http(s) URL with a host".into(),
        });
    }
    Ok(url)
}

fn profile_url(candidate: &CandidateRecord, base: &str) -> Result<String> {
    if let Some(explicit) = &candidate.profile_url {
        return checked_url(explicit).map(String::from);
    }
    let mut url = checked_url(base)?;
    url.path_segments_mut()
        .map_err(|()| Error::Url {
            url: base.to_owned(),
            reason: "base cannot take path segments".into(),
        })?
        .pop_if_empty()
        .push(&candidate.id);
    Ok(url.into())
}

pub fn page_spec(
    result: &MatchResult,
    student: Option<&StudentRecord>,
    candidates: &HashMap<&str, &CandidateRecord>,
    options: &PageOptions,
) -> Result<PageSpec> {
    if result.ranked.is_empty() {
        return Err(Error::Config(format!("no ranked role models for {}", result.student_id)));
    }
    let entries = result
        .ranked
        .iter()
        .map(|e| {
            let c = candidates
                .get(e.candidate_id.as_str())
                .ok_or_else(|| Error::MissingRecord(e.candidate_id.clone()))?;
            Ok(PageEntry {
                display_name: if c.full_name.trim().is_empty() {
                    c.id.clone()
                } else {
                    c.full_name.trim().to_owned()
                },
                profile_url: profile_url(c, &options.profile_base_url)?,
                industry: c.industry.clone(),
                location: c.location_raw.trim().to_owned(),
            })
        })
        .collect::<Result<_>>()?;
    let survey_url = options
        .survey_url
        .as_deref()
        .map(|u| checked_url(u).map(String::from))
        .transpose()?;
    let greeting_name = student
        .map(|s| s.display_name.trim())
        .filter(|n| !n.is_empty())
        .unwrap_or(&result.student_id)
        .to_owned();
    Ok(PageSpec {
        student_id: result.student_id.clone(),
        greeting_name,
        entries,
        survey_url,
    })
}

pub fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

const STYLE: &str = "body{font-family:Helvetica,Arial,sans-serif;max-width:42rem;margin:2rem auto;padding:0 1rem;color:#222}\
h1{font-size:1.5rem}ol{padding-left:1.2rem}li{margin:0.8rem 0}\
.meta{color:#555;font-size:0.9rem}.survey{margin-top:2rem;padding-top:1rem;border-top:1px solid #ddd}";

pub fn render_page(spec: &PageSpec) -> String {
    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(
        html,
        "<title>STEM role models for {}</title>",
        escape_html(&spec.greeting_name)
    );
    let _ = writeln!(html, "<style>{STYLE}</style>\n</head>\n<body>");
    let _ = writeln!(html, "<h1>Hi {}!</h1>", escape_html(&spec.greeting_name));
    html.push_str(
        "<p>Here are STEM professionals who share your background and interests. \
         Take a look at their profiles and see where a STEM path could lead you.</p>\n",
    );
    html.push_str("<ol class=\"role-models\">\n");
    for e in &spec.entries {
        let _ = writeln!(
            html,
            "<li><a class=\"profile\" href=\"{}\">{}</a><br><span class=\"meta\">{} &middot; {}</span></li>",
            escape_html(&e.profile_url),
            escape_html(&e.display_name),
            escape_html(&e.industry),
            escape_html(&e.location),
        );
    }
    html.push_str("</ol>\n");
    if let Some(survey) = &spec.survey_url {
        let _ = writeln!(
            html,
            "<p class=\"survey\">How good are these recommendations? \
             <a class=\"survey-link\" href=\"{}\">Take a short survey</a>.</p>",
            escape_html(survey)
        );
    }
    html.push_str("</body>\n</html>\n");
    html
}

pub fn generate_page(
    result: &MatchResult,
    student: Option<&StudentRecord>,
    candidates: &HashMap<&str, &CandidateRecord>,
    options: &PageOptions,
) -> Result<String> {
    page_spec(result, student, candidates, options).map(|s| render_page(&s))
}

/// File name for a student's page; characters outside `[A-Za-z0-9._-]` become `_`.
pub fn page_file_name(student_id: &str) -> String {
    let safe: String = student_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect();
    let safe = if safe.trim_matches('.').is_empty() {
        format!("_{safe}")
    } else {
        safe
    };
    format!("{safe}.html")
}
