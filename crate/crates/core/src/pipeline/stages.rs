//! The four chat-driven stages: comment formatting, shallow filtering,
//! question generation, and verification with one regeneration pass.

use super::backend::{ChatClient, ChatRequest};
use super::template::{
    comment_formatting_template, goal_template, question_generation_template,
    question_regeneration_template, question_verification_template, shallow_check_template,
};
use super::PipelineError;
use crate::corpus::{AtomicDescription, CommentType, FormattedComment, RawComment};

/// Formatted comments shorter than this many words are dropped outright.
pub const DEFAULT_MIN_WORDS: usize = 8;

/// Outcome of a deterministic or chat-backed check on one question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub ok: bool,
    /// Why the question was rejected; empty exactly when `ok`.
    pub reason: String,
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict {
            ok: true,
            reason: String::new(),
        }
    }

    pub fn fail(reason: impl Into<String>) -> Self {
        let reason = reason.into();
        debug_assert!(!reason.is_empty(), "failed verdicts carry a reason");
        Verdict { ok: false, reason }
    }
}

/// Render one group of raw comments as the formatting prompt's input block:
/// one line per comment with its timestamp.
fn comment_block(group: &[RawComment]) -> String {
    group
        .iter()
        .map(|c| format!("[{}s] {}", c.t, c.text))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Narration block for the generation and verification prompts.
fn desc_block(descs: &[AtomicDescription]) -> String {
    descs
        .iter()
        .map(|d| d.text.as_str())
        .collect::<Vec<_>>()
        .join("\n")
}

fn parse_label_line(line: &str) -> Option<(CommentType, &str)> {
    let line = line.trim_start();
    for (prefix, label) in [
        ("[Good Execution]", CommentType::GoodExecution),
        ("[Tip for Improvement]", CommentType::TipsForImprovement),
        ("[Tips for Improvement]", CommentType::TipsForImprovement),
    ] {
        if let Some(rest) = line.strip_prefix(prefix) {
            return Some((label, rest.trim()));
        }
    }
    None
}

/// Send one group of same-video, same-label raw comments through the
/// formatting prompt and parse the labeled output lines. Output ids derive
/// from the group's first comment id; the timestamp is the earliest in the
/// group; source_ids list the whole group.
pub fn format_comments(
    client: &dyn ChatClient,
    temperature: f64,
    group: &[RawComment],
    scenario: &str,
) -> Result<Vec<FormattedComment>, PipelineError> {
    let first = group.first().ok_or(PipelineError::InvalidGroup)?;
    if group
        .iter()
        .any(|c| c.video_id != first.video_id || c.type_label != first.type_label)
    {
        return Err(PipelineError::InvalidGroup);
    }

    let template = comment_formatting_template();
    let block = comment_block(group);
    let prompt = template.render(&[
        ("comment_text", block.as_str()),
        ("scenario_name", scenario),
        ("task_type", first.type_label.human_label()),
    ])?;
    let response = client.complete(&ChatRequest {
        template_id: template.id().to_string(),
        prompt,
        temperature,
    })?;

    if response.trim().is_empty() {
        // The formatter discarded the whole group; legitimate, but worth a
        // trace in the log.
        log::warn!(
            "formatter discarded group starting at {}",
            first.comment_id
        );
        return Ok(Vec::new());
    }

    let t_min = group.iter().map(|c| c.t).fold(f64::INFINITY, f64::min);
    let source_ids: Vec<String> = group.iter().map(|c| c.comment_id.clone()).collect();
    let mut out = Vec::new();
    for line in response.lines() {
        if let Some((label, text)) = parse_label_line(line) {
            if text.is_empty() {
                continue;
            }
            out.push(FormattedComment {
                comment_id: format!("{}/f{}", first.comment_id, out.len()),
                video_id: first.video_id.clone(),
                t: t_min,
                type_label: label,
                text: text.to_string(),
                source_ids: source_ids.clone(),
            });
        }
    }
    if out.is_empty() {
        return Err(PipelineError::Unparseable { raw: response });
    }
    Ok(out)
}

/// Comments kept by the shallow filter plus the dropped ones with reasons.
#[derive(Debug, Default)]
pub struct FilterOutcome {
    pub kept: Vec<FormattedComment>,
    pub dropped: Vec<(FormattedComment, String)>,
}

/// Drop comments under the word minimum, then ask the checker backend
/// about the rest. The checker is advisory: any failure or unexpected
/// reply keeps the comment (the length rule is the filter that must hold).
pub fn filter_shallow(
    checker: &dyn ChatClient,
    temperature: f64,
    comments: &[FormattedComment],
    min_words: usize,
) -> FilterOutcome {
    let template = shallow_check_template();
    let mut outcome = FilterOutcome::default();
    for comment in comments {
        let words = comment.text.split_whitespace().count();
        if words < min_words {
            outcome.dropped.push((
                comment.clone(),
                format!("short: {words} words < {min_words}"),
            ));
            continue;
        }
        let decision = template
            .render(&[("comment_text", comment.text.as_str())])
            .map(|prompt| {
                checker.complete(&ChatRequest {
                    template_id: template.id().to_string(),
                    prompt,
                    temperature,
                })
            });
        match decision {
            Ok(Ok(reply)) => {
                let reply = reply.trim();
                if reply.eq_ignore_ascii_case("exclude") {
                    outcome
                        .dropped
                        .push((comment.clone(), "checker: shallow".into()));
                } else {
                    if !reply.eq_ignore_ascii_case("keep") {
                        log::warn!(
                            "checker reply {reply:?} for {} is neither keep nor exclude; keeping",
                            comment.comment_id
                        );
                    }
                    outcome.kept.push(comment.clone());
                }
            }
            Ok(Err(e)) | Err(e) => {
                log::warn!(
                    "shallow check failed for {}; keeping: {e}",
                    comment.comment_id
                );
                outcome.kept.push(comment.clone());
            }
        }
    }
    outcome
}

/// Extract the text after the "[question]" prefix, searching all lines.
fn extract_question(response: &str) -> Option<String> {
    for line in response.lines() {
        if let Some(rest) = line.trim_start().strip_prefix("[question]") {
            let rest = rest.trim();
            if !rest.is_empty() {
                return Some(rest.to_string());
            }
        }
    }
    None
}

fn request_question(
    client: &dyn ChatClient,
    request: &ChatRequest,
    comment_id: &str,
) -> Result<String, PipelineError> {
    let first = client.complete(request)?;
    if let Some(q) = extract_question(&first) {
        return Ok(q);
    }
    // One automatic re-request; a second malformed response is an error.
    let second = client.complete(request)?;
    extract_question(&second).ok_or_else(|| PipelineError::QuestionFormat {
        comment_id: comment_id.to_string(),
        raw: second,
    })
}

fn generation_bindings<'a>(
    comment: &'a FormattedComment,
    desc_text: &'a str,
    scenario: &'a str,
) -> Vec<(&'a str, &'a str)> {
    vec![
        ("desc_text", desc_text),
        ("A", comment.text.as_str()),
        ("scenario_name", scenario),
        ("task_type", comment.type_label.human_label()),
        ("goal_template", goal_template(comment.type_label)),
    ]
}

/// Produce the initial question for one formatted comment from the window's
/// descriptions.
pub fn generate_question(
    client: &dyn ChatClient,
    temperature: f64,
    comment: &FormattedComment,
    descs: &[AtomicDescription],
    scenario: &str,
) -> Result<String, PipelineError> {
    let template = question_generation_template();
    let desc_text = desc_block(descs);
    let prompt = template.render(&generation_bindings(comment, &desc_text, scenario))?;
    request_question(
        client,
        &ChatRequest {
            template_id: template.id().to_string(),
            prompt,
            temperature,
        },
        &comment.comment_id,
    )
}

const QUESTION_WORDS: [&str; 7] = ["what", "why", "how", "when", "where", "which", "who"];

/// Deterministic pre-check: a question must contain a question mark and at
/// most one interrogative word outside double quotes.
pub fn lint_question(q: &str) -> Verdict {
    let mut found: Vec<&str> = Vec::new();
    let mut token = String::new();
    let mut in_quotes = false;
    for ch in q.chars().chain(std::iter::once(' ')) {
        if ch.is_alphanumeric() {
            token.extend(ch.to_lowercase());
            continue;
        }
        // Flush the word under the quote state it was read in, then let a
        // closing quote flip the state.
        if !token.is_empty() {
            if !in_quotes {
                if let Some(&w) = QUESTION_WORDS.iter().find(|&&w| w == token) {
                    found.push(w);
                }
            }
            token.clear();
        }
        if ch == '"' {
            in_quotes = !in_quotes;
        }
    }

    let mut problems = Vec::new();
    if found.len() >= 2 {
        problems.push(format!("multiple question words: {}", found.join(", ")));
    }
    if !q.contains('?') {
        problems.push("missing question mark".to_string());
    }
    if problems.is_empty() {
        Verdict::pass()
    } else {
        Verdict::fail(problems.join("; "))
    }
}

/// Ask the backend to check a question against the rule list. A trimmed
/// "OK" passes; a "Reason:" prefix carries the rejection; anything else is
/// a rejection with the raw reply as the reason.
pub fn verify_question(
    client: &dyn ChatClient,
    temperature: f64,
    q: &str,
    comment: &FormattedComment,
    descs: &[AtomicDescription],
) -> Result<Verdict, PipelineError> {
    let template = question_verification_template();
    let desc_text = desc_block(descs);
    let prompt = template.render(&[
        ("Qe", q),
        ("A", comment.text.as_str()),
        ("desc_text", desc_text.as_str()),
    ])?;
    let response = client.complete(&ChatRequest {
        template_id: template.id().to_string(),
        prompt,
        temperature,
    })?;
    let trimmed = response.trim();
    if trimmed.eq_ignore_ascii_case("ok") {
        return Ok(Verdict::pass());
    }
    if let Some(reason) = trimmed.strip_prefix("Reason:") {
        let reason = reason.trim();
        if !reason.is_empty() {
            return Ok(Verdict::fail(reason));
        }
    }
    Ok(Verdict::fail(trimmed.to_string()))
}

/// Regenerate once from the rejected question and the verifier's reason.
/// The result is final; callers may lint it but never send it back.
pub fn regenerate_question(
    client: &dyn ChatClient,
    temperature: f64,
    rejected: &str,
    reason: &str,
    comment: &FormattedComment,
    descs: &[AtomicDescription],
    scenario: &str,
) -> Result<String, PipelineError> {
    if reason.trim().is_empty() {
        return Err(PipelineError::EmptyReason);
    }
    let template = question_regeneration_template();
    let desc_text = desc_block(descs);
    let mut bindings = generation_bindings(comment, &desc_text, scenario);
    bindings.push(("Qe", rejected));
    bindings.push(("reason", reason));
    let prompt = template.render(&bindings)?;
    request_question(
        client,
        &ChatRequest {
            template_id: template.id().to_string(),
            prompt,
            temperature,
        },
        &comment.comment_id,
    )
}
