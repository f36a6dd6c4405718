mod common;

use std::fs;
use std::path::Path;

use clts_eval::cli::demo::english_french_pairs;
use clts_eval::corpus::providers::{HttpSentenceEmbedder, HttpTranslator};
use clts_eval::corpus::{SentenceEmbedder, Translator};
use clts_eval::http::{JsonEndpoint, RetryPolicy};
use clts_eval::metrics::{HttpTokenEmbedder, TokenEmbedder};
use clts_eval::prompting::{ChatBackend, ChatRequest, HttpChatBackend};
use clts_eval::Lang;
use common::{clts, FakeServices};

fn project(dir: &Path, base: &str, alpha: f64) -> std::path::PathBuf {
    let mut jsonl = String::new();
    for p in english_french_pairs("tiny", 1) {
        jsonl.push_str(&serde_json::to_string(&p).unwrap());
        jsonl.push('\n');
    }
    fs::write(dir.join("tiny.jsonl"), jsonl).unwrap();
    let config = dir.join("run.toml");
    fs::write(
        &config,
        format!(
            r#"seed = 3

[[corpora]]
id = "tiny"
path = "tiny.jsonl"
format = "jsonl"

[[backends]]
name = "remote"
base_url = "{base}/v1"
model = "some-model"

[preprocess]
embedder = "{base}/embed"
translator = "{base}/translate"

[generation]
backoff_base_ms = 0

[metrics.token_embedders]
fr = "{base}/tokens"

[stats]
alpha = {alpha}
"#
        ),
    )
    .unwrap();
    config
}

#[test]
fn generate_over_http_then_resume_without_new_calls() {
    let services = FakeServices::start();
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let config = project(dir.path(), &services.base, 0.05);

    assert_eq!(clts("preprocess", &config, &run, &[]).code, 0);
    assert_eq!(services.hits("/embed"), 1);
    assert_eq!(services.hits("/translate"), 0);

    let first = clts("generate", &config, &run, &[]);
    assert_eq!(first.code, 0, "{}", first.stderr);
    // one item: three single-call strategies and two two-step ones
    assert_eq!(services.hits("/v1/chat/completions"), 7);

    assert_eq!(clts("generate", &config, &run, &["--resume"]).code, 0);
    assert_eq!(services.hits("/v1/chat/completions"), 7);

    // an unrelated config edit makes the stage stale; the cache still covers it
    let config = project(dir.path(), &services.base, 0.01);
    assert_eq!(clts("preprocess", &config, &run, &["--resume"]).code, 0);
    let again = clts("generate", &config, &run, &["--resume"]);
    assert_eq!(again.code, 0, "{}", again.stderr);
    assert_eq!(services.hits("/v1/chat/completions"), 7);

    let metrics = clts("metrics", &config, &run, &[]);
    assert_eq!(metrics.code, 0, "{}", metrics.stderr);
    assert!(services.hits("/tokens") >= 1);
    let items = fs::read_to_string(run.join("metrics/items.jsonl")).unwrap();
    assert_eq!(items.lines().count(), 5);
}

#[test]
fn unreachable_backend_exits_with_backend_code() {
    let services = FakeServices::start();
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let config = project(dir.path(), &services.base, 0.05);
    assert_eq!(clts("preprocess", &config, &run, &[]).code, 0);
    let text = fs::read_to_string(&config)
        .unwrap()
        .replace(&format!("{}/v1", services.base), &format!("{}/missing", services.base));
    fs::write(&config, text).unwrap();
    let out = clts("generate", &config, &run, &[]);
    assert_eq!(out.code, 3, "{}", out.stderr);
}

#[test]
fn clients_speak_the_documented_json() {
    let services = FakeServices::start();
    let ep = |path: &str| JsonEndpoint::new(format!("{}{path}", services.base), None, RetryPolicy::no_delay(0));

    let chat = HttpChatBackend::new("remote", &format!("{}/v1", services.base), "m", Some("secret".into()));
    let reply = chat
        .complete(&ChatRequest {
            system_prompt: "sys",
            user_prompt: "Please simplify the following text: Hello there.",
            temperature: 1.0,
            top_p: 1.0,
        })
        .unwrap();
    assert_eq!(reply, "Hello there.");

    let texts = vec!["a b".to_string(), "c".to_string()];
    assert_eq!(HttpSentenceEmbedder::new(ep("/embed")).embed(&texts).unwrap().len(), 2);
    assert_eq!(
        HttpTranslator::new(ep("/translate")).translate(&texts, Lang::Fr, Lang::En).unwrap(),
        texts
    );
    let embedded = HttpTokenEmbedder::new(ep("/tokens")).embed_tokens(&texts, Lang::En).unwrap();
    assert_eq!(embedded[0].tokens, ["a", "b"]);
    assert_eq!(embedded[0].vectors.len(), 2);

    let missing = HttpSentenceEmbedder::new(ep("/nowhere")).embed(&texts);
    assert!(missing.is_err());
}
