//! Fixtures shared by the binary-level test targets: a tiny replayable
//! conversion world and a generated corpus laid out like a convert run.
#![allow(dead_code)]

use std::path::Path;
use std::process::Command;

use elicit_core::corpus::{
    save_commentary, save_descriptions, save_formatted_comments, save_manifest, save_qa_pairs,
    AtomicDescription, CommentType, QAPair, RawComment, SplitManifest,
};
use elicit_core::pipeline::{
    comment_formatting_template, goal_template, question_generation_template,
    question_verification_template, request_hash, save_transcript, shallow_check_template,
    PromptTemplate, TranscriptEntry,
};
use elicit_core::synthetic::{generate_world, SyntheticConfig};

pub fn elicit(dir: &Path) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_elicit"));
    cmd.current_dir(dir).env_remove("ELICIT_API_KEY");
    cmd
}

pub fn run_ok(dir: &Path, args: &[&str]) -> String {
    let output = elicit(dir).args(args).output().unwrap();
    assert!(
        output.status.success(),
        "elicit {args:?} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).unwrap()
}

/// Contents of every file under `dir`/out, sorted by name.
pub fn output_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut names: Vec<String> = std::fs::read_dir(dir.join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let bytes = std::fs::read(dir.join("out").join(&n)).unwrap();
            (n, bytes)
        })
        .collect()
}

pub const SCENARIO: &str = "Knife Sharpening";
pub const K1_TEXT: &str =
    "You held the blade angle steady through the whole stroke, which protects the edge.";
pub const K2_TEXT: &str =
    "Try lighter pressure on the return stroke so the burr does not fold over.";
pub const K1_FORMATTED: &str =
    "The blade angle stays constant through the full sharpening stroke of the knife.";
pub const K2_FORMATTED: &str =
    "Lighter return-stroke pressure would keep the burr from folding over the apex.";
pub const K1_DESCS: &str =
    "A chef draws a knife across a whetstone.\nThe blade angle holds near fifteen degrees.";
pub const K2_DESCS: &str =
    "A trainee flips the blade for the return pass.\nThe burr glints along the edge line.";

pub struct Exchange {
    pub template: PromptTemplate,
    pub bindings: Vec<(&'static str, String)>,
    pub response: &'static str,
}

impl Exchange {
    pub fn entry(&self) -> TranscriptEntry {
        let bindings: Vec<(&str, &str)> = self
            .bindings
            .iter()
            .map(|(k, v)| (*k, v.as_str()))
            .collect();
        let prompt = self.template.render(&bindings).expect("fixture renders");
        TranscriptEntry {
            request_hash: request_hash(self.template.id(), &prompt),
            response_text: self.response.to_string(),
        }
    }
}

/// Every exchange the knife conversion makes, in no particular order;
/// replay is keyed by request hash.
pub fn knife_exchanges() -> Vec<Exchange> {
    let mut out = Vec::new();
    out.push(Exchange {
        template: comment_formatting_template(),
        bindings: vec![
            ("comment_text", format!("[4s] {K1_TEXT}")),
            ("scenario_name", SCENARIO.to_string()),
            ("task_type", "Good Execution".to_string()),
        ],
        response: "[Good Execution] The blade angle stays constant through the full sharpening stroke of the knife.",
    });
    out.push(Exchange {
        template: comment_formatting_template(),
        bindings: vec![
            ("comment_text", format!("[9s] {K2_TEXT}")),
            ("scenario_name", SCENARIO.to_string()),
            ("task_type", "Tips for Improvement".to_string()),
        ],
        response: "[Tips for Improvement] Lighter return-stroke pressure would keep the burr from folding over the apex.",
    });
    for formatted in [K1_FORMATTED, K2_FORMATTED] {
        out.push(Exchange {
            template: shallow_check_template(),
            bindings: vec![("comment_text", formatted.to_string())],
            response: "keep",
        });
    }
    out.push(Exchange {
        template: question_generation_template(),
        bindings: vec![
            ("desc_text", K1_DESCS.to_string()),
            ("A", K1_FORMATTED.to_string()),
            ("scenario_name", SCENARIO.to_string()),
            ("task_type", "Good Execution".to_string()),
            (
                "goal_template",
                goal_template(CommentType::GoodExecution).to_string(),
            ),
        ],
        response: "[question] Why does keeping one angle matter for the edge?",
    });
    out.push(Exchange {
        template: question_generation_template(),
        bindings: vec![
            ("desc_text", K2_DESCS.to_string()),
            ("A", K2_FORMATTED.to_string()),
            ("scenario_name", SCENARIO.to_string()),
            ("task_type", "Tips for Improvement".to_string()),
            (
                "goal_template",
                goal_template(CommentType::TipsForImprovement).to_string(),
            ),
        ],
        response: "[question] What keeps the burr from folding over?",
    });
    out.push(Exchange {
        template: question_verification_template(),
        bindings: vec![
            ("Qe", "Why does keeping one angle matter for the edge?".to_string()),
            ("A", K1_FORMATTED.to_string()),
            ("desc_text", K1_DESCS.to_string()),
        ],
        response: "OK",
    });
    out.push(Exchange {
        template: question_verification_template(),
        bindings: vec![
            ("Qe", "What keeps the burr from folding over?".to_string()),
            ("A", K2_FORMATTED.to_string()),
            ("desc_text", K2_DESCS.to_string()),
        ],
        response: "OK",
    });
    out
}

fn raw(comment_id: &str, video_id: &str, label: CommentType, t: f64, text: &str) -> RawComment {
    RawComment {
        comment_id: comment_id.into(),
        video_id: video_id.into(),
        scenario: SCENARIO.into(),
        t,
        type_label: label,
        text: text.into(),
    }
}

fn desc(video_id: &str, t: f64, text: &str) -> AtomicDescription {
    AtomicDescription {
        video_id: video_id.into(),
        t,
        text: text.into(),
    }
}

/// Write the knife-sharpening conversion fixture into `dir`, with the
/// transcript filtered by `keep_entry`.
pub fn write_knife_fixture(dir: &Path, keep_entry: impl Fn(&TranscriptEntry) -> bool) {
    save_commentary(
        dir.join("commentary.jsonl"),
        &[
            raw("c100", "k1", CommentType::GoodExecution, 4.0, K1_TEXT),
            raw("c200", "k2", CommentType::TipsForImprovement, 9.0, K2_TEXT),
        ],
    )
    .unwrap();
    save_descriptions(
        dir.join("descriptions.jsonl"),
        &[
            desc("k1", 1.0, "A chef draws a knife across a whetstone."),
            desc("k1", 3.5, "The blade angle holds near fifteen degrees."),
            desc("k2", 5.0, "A trainee flips the blade for the return pass."),
            desc("k2", 8.5, "The burr glints along the edge line."),
        ],
    )
    .unwrap();
    save_manifest(
        dir.join("manifest.json"),
        &SplitManifest {
            train: vec!["k1".into()],
            seen: vec![],
            val: vec!["k2".into()],
        },
    )
    .unwrap();
    let entries: Vec<TranscriptEntry> = knife_exchanges()
        .iter()
        .map(Exchange::entry)
        .filter(|e| keep_entry(e))
        .collect();
    save_transcript(dir.join("transcript.jsonl"), &entries).unwrap();
    std::fs::write(
        dir.join("elicit.toml"),
        "[paths]\n\
         commentary = \"commentary.jsonl\"\n\
         descriptions = \"descriptions.jsonl\"\n\
         manifest = \"manifest.json\"\n\
         output_dir = \"out\"\n\
         \n\
         [chat]\n\
         mode = \"replay\"\n\
         transcript = \"transcript.jsonl\"\n",
    )
    .unwrap();
}

/// Lay a generated corpus out like a finished convert run: 2 scenarios x 3
/// videos x 5 pairs; the last video of scenario 0 is the seen split, the
/// last of scenario 1 the val split.
pub fn write_synthetic_out(dir: &Path) {
    let world = generate_world(&SyntheticConfig {
        scenarios: 2,
        videos_per_scenario: 3,
        pairs_per_video: 5,
        ..SyntheticConfig::default()
    });
    let out = dir.join("out");
    std::fs::create_dir_all(&out).unwrap();
    let by_split = |pairs: &[QAPair], videos: &[&str]| -> Vec<QAPair> {
        pairs
            .iter()
            .filter(|p| videos.contains(&p.video_id.as_str()))
            .cloned()
            .collect()
    };
    let train = by_split(&world.pairs, &["s00v00", "s00v01", "s01v00", "s01v01"]);
    let seen = by_split(&world.pairs, &["s00v02"]);
    let val = by_split(&world.pairs, &["s01v02"]);
    assert_eq!((train.len(), seen.len(), val.len()), (20, 5, 5));
    save_qa_pairs(out.join("qa_train.jsonl"), &train).unwrap();
    save_qa_pairs(out.join("qa_seen.jsonl"), &seen).unwrap();
    save_qa_pairs(out.join("qa_val.jsonl"), &val).unwrap();
    save_formatted_comments(out.join("formatted.jsonl"), &world.comments).unwrap();
    let scenarios = serde_json::to_string_pretty(&world.scenario_by_video).unwrap();
    std::fs::write(out.join("scenarios.json"), scenarios + "\n").unwrap();

    std::fs::write(
        dir.join("elicit.toml"),
        "[paths]\n\
         output_dir = \"out\"\n\
         \n\
         [train]\n\
         buckets = 4096\n\
         dim = 16\n\
         epochs = 6\n\
         batch_size = 64\n\
         \n\
         [pool]\n\
         size = 20\n\
         seed = 11\n\
         \n\
         [eval]\n\
         seed = 13\n\
         reps = 2\n",
    )
    .unwrap();
}
