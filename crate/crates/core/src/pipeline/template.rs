//! Prompt templates with `{placeholder}` substitution. The template bodies
//! ship as plain-text files under prompts/ and are embedded at build time.

use super::PipelineError;
use crate::corpus::CommentType;

const COMMENT_FORMATTING: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../prompts/comment_formatting.txt"
));
const QUESTION_GENERATION: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../prompts/question_generation.txt"
));
const QUESTION_VERIFICATION: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../prompts/question_verification.txt"
));
const REGENERATION_SUFFIX: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../prompts/regeneration_suffix.txt"
));
const GOAL_GOOD_EXECUTIONS: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../prompts/goal_good_executions.txt"
));
const GOAL_TIPS_FOR_IMPROVEMENT: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../prompts/goal_tips_for_improvement.txt"
));
const SHALLOW_CHECK: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../prompts/shallow_check.txt"
));

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    template_id: String,
    body: String,
}

impl PromptTemplate {
    pub fn new(template_id: impl Into<String>, body: impl Into<String>) -> Self {
        PromptTemplate {
            template_id: template_id.into(),
            body: body.into(),
        }
    }

    pub fn id(&self) -> &str {
        &self.template_id
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    /// Substitute every `{name}` occurrence. A placeholder without a
    /// binding fails; bindings without placeholders are ignored. Braces
    /// not wrapping an identifier pass through untouched.
    pub fn render(&self, bindings: &[(&str, &str)]) -> Result<String, PipelineError> {
        let mut out = String::with_capacity(self.body.len());
        let mut rest = self.body.as_str();
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            match after.find('}') {
                Some(close) if is_identifier(&after[..close]) => {
                    let name = &after[..close];
                    let value = bindings
                        .iter()
                        .find(|(k, _)| *k == name)
                        .map(|(_, v)| *v)
                        .ok_or_else(|| PipelineError::UnboundPlaceholder {
                            template_id: self.template_id.clone(),
                            placeholder: name.to_string(),
                        })?;
                    out.push_str(value);
                    rest = &after[close + 1..];
                }
                _ => {
                    out.push('{');
                    rest = after;
                }
            }
        }
        out.push_str(rest);
        Ok(out)
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Rewrites grouped raw commentary into formal labeled comments.
pub fn comment_formatting_template() -> PromptTemplate {
    PromptTemplate::new("comment_formatting", COMMENT_FORMATTING)
}

/// Produces the initial question for one formatted comment.
pub fn question_generation_template() -> PromptTemplate {
    PromptTemplate::new("question_generation", QUESTION_GENERATION)
}

/// Checks a generated question against the rule list.
pub fn question_verification_template() -> PromptTemplate {
    PromptTemplate::new("question_verification", QUESTION_VERIFICATION)
}

/// Generation prompt extended with the rejected question and the reason it
/// was rejected.
pub fn question_regeneration_template() -> PromptTemplate {
    let mut body = String::from(QUESTION_GENERATION);
    if !body.ends_with('\n') {
        body.push('\n');
    }
    body.push('\n');
    body.push_str(REGENERATION_SUFFIX);
    PromptTemplate::new("question_regeneration", body)
}

/// Asks the checker backend to keep or exclude a formatted comment.
pub fn shallow_check_template() -> PromptTemplate {
    PromptTemplate::new("shallow_check", SHALLOW_CHECK)
}

/// Label-specific goal text spliced into the generation prompt.
pub fn goal_template(label: CommentType) -> &'static str {
    match label {
        CommentType::GoodExecution => GOAL_GOOD_EXECUTIONS.trim_end_matches('\n'),
        CommentType::TipsForImprovement => GOAL_TIPS_FOR_IMPROVEMENT.trim_end_matches('\n'),
    }
}
