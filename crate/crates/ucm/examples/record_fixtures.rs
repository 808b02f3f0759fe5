//! Regenerates `data/fixtures` for the bundled library requirements.
//!
//! The replies below are written in the style of a chat model (prose around
//! a fenced block; the first diagram draws an actor-to-actor edge and is
//! corrected on the re-prompt). They are fed through the recording wrapper
//! so each exchange lands in `<hash>.json`.
//!
//!     cargo run -p ucm --example record_fixtures [-- <out-dir>]

use std::fs;
use std::path::PathBuf;

use ucm::cli::{load_requirements, BUNDLED_REQUIREMENTS, DEFAULT_FIXTURES};
use ucm::{Recording, ScriptedProvider};
use ucm_core::model::{Actor, ActorKind, Association, UseCase, UseCaseModel};
use ucm_core::pipeline::{SequentialIds, StepClock};
use ucm_core::{render_model, Pipeline, Step};

const ACTORS: &str = r#"Based on the requirements, I identified the following actors:

```json
[
  {"name": "Member", "kind": "human", "evidence": "Members search the library catalog"},
  {"name": "Librarian", "kind": "human", "evidence": "a librarian checks items out"},
  {"name": "E-mail service", "kind": "external_system", "evidence": "through the e-mail service"},
  {"name": "Payment provider", "kind": "external_system", "evidence": "the payment provider authorizes each card payment"}
]
```

The library system itself is not listed as an actor."#;

const USECASES: &str = r#"Here are the use cases related to the confirmed actors:

```json
[
  {"title": "Search catalog", "actors": ["Member"], "evidence": "Members search the library catalog for books"},
  {"title": "Place hold", "actors": ["Member"], "evidence": "place holds on titles that are currently on loan"},
  {"title": "Check out item", "actors": ["Librarian"], "evidence": "a librarian checks items out to members"},
  {"title": "Check in item", "actors": ["Librarian"], "evidence": "checks them back in when they are returned"},
  {"title": "Register member", "actors": ["Librarian"], "evidence": "Librarians register new members"},
  {"title": "Maintain catalog", "actors": ["Librarian"], "evidence": "maintain the catalog by adding and withdrawing titles"},
  {"title": "Send overdue reminder", "actors": ["E-mail service"], "evidence": "sends a reminder to the member through the e-mail service"},
  {"title": "Pay fine", "actors": ["Member", "Payment provider"], "evidence": "Members pay overdue fines online"}
]
```"#;

fn diagram() -> String {
    let mut m = UseCaseModel::empty("Library Management System");
    let actors = [
        ("A1", "Member", ActorKind::Human),
        ("A2", "Librarian", ActorKind::Human),
        ("A3", "E-mail service", ActorKind::ExternalSystem),
        ("A4", "Payment provider", ActorKind::ExternalSystem),
    ];
    for (id, name, kind) in actors {
        m.actors.push(Actor::new(id, name).with_kind(kind));
    }
    let ucs: [(&str, &str, &[&str]); 8] = [
        ("UC1", "Search catalog", &["A1"]),
        ("UC2", "Place hold", &["A1"]),
        ("UC3", "Check out item", &["A2"]),
        ("UC4", "Check in item", &["A2"]),
        ("UC5", "Register member", &["A2"]),
        ("UC6", "Maintain catalog", &["A2"]),
        ("UC7", "Send overdue reminder", &["A3"]),
        ("UC8", "Pay fine", &["A1", "A4"]),
    ];
    for (id, title, links) in ucs {
        for a in links {
            m.associations.push(Association::new(*a, id));
        }
        m.use_cases.push(UseCase::new(id, title, links.iter().copied()));
    }
    render_model(&m).expect("hand-built model is valid")
}

fn description(pre: &str, flow: &[&str], alt: (&str, &[&str]), post: &str) -> String {
    let body = serde_json::json!({
        "preconditions": [pre],
        "main_flow": flow,
        "alternative_flows": [{"label": alt.0, "steps": alt.1}],
        "postconditions": [post],
    });
    format!(
        "Here is the use case description:\n\n```json\n{}\n```\n",
        serde_json::to_string_pretty(&body).unwrap()
    )
}

fn replies() -> Vec<String> {
    let clean = diagram();
    let dirty = clean.replace("@enduml", "A1 --> A2\n@enduml");
    let mut r = vec![
        ACTORS.to_string(),
        USECASES.to_string(),
        format!("Here is the use case diagram:\n\n```plantuml\n{dirty}```\n\nMembers interact with librarians at the desk."),
        format!("Corrected diagram without the actor-to-actor association:\n\n```plantuml\n{clean}```\n"),
    ];
    r.push(description(
        "The member has opened the online catalog.",
        &[
            "The member enters search terms.",
            "The system lists the matching titles with their availability.",
            "The member selects a title to view its details.",
        ],
        ("2a", &["No title matches the search terms.", "The system suggests broader terms."]),
        "The member has seen the availability of the selected title.",
    ));
    r.push(description(
        "The member is signed in and the title is on loan.",
        &[
            "The member selects a title that is on loan.",
            "The member requests a hold.",
            "The system queues the hold and confirms its position.",
        ],
        ("2a", &["The member already holds this title.", "The system reports the existing hold."]),
        "A hold for the member is queued on the title.",
    ));
    r.push(description(
        "The member is registered and has no blocking fines.",
        &[
            "The librarian scans the member card.",
            "The librarian scans each item.",
            "The system records the loans and their due dates.",
            "The librarian hands the items to the member.",
        ],
        ("3a", &["An item is held for another member.", "The system refuses the loan for that item."]),
        "Each item is on loan to the member.",
    ));
    r.push(description(
        "An item on loan is returned at the desk.",
        &[
            "The librarian scans the returned item.",
            "The system closes the loan.",
            "The system marks the item available or routes it to the next hold.",
        ],
        ("2a", &["The loan is overdue.", "The system records a fine for the member."]),
        "The loan is closed.",
    ));
    r.push(description(
        "The applicant has presented proof of identity.",
        &[
            "The librarian enters the applicant's details.",
            "The system checks that the person is not already registered.",
            "The system creates the membership and issues a member number.",
        ],
        ("2a", &["The person is already registered.", "The system shows the existing membership."]),
        "The new member can borrow items.",
    ));
    r.push(description(
        "The librarian is signed in to the staff view.",
        &[
            "The librarian chooses to add or withdraw a title.",
            "The librarian enters or selects the title record.",
            "The system updates the catalog.",
        ],
        ("3a", &["A withdrawn title still has loans.", "The system keeps the title until all copies are returned."]),
        "The catalog reflects the change.",
    ));
    r.push(description(
        "A loan has passed its due date.",
        &[
            "The system detects the overdue loan.",
            "The system composes a reminder for the member.",
            "The e-mail service delivers the reminder.",
        ],
        ("3a", &["Delivery fails.", "The system retries the next day."]),
        "The member has been reminded of the overdue loan.",
    ));
    r.push(description(
        "The member is signed in and owes a fine.",
        &[
            "The member opens the list of outstanding fines.",
            "The member enters card details and confirms the amount.",
            "The payment provider authorizes the payment.",
            "The system marks the fines as paid.",
        ],
        ("3a", &["The payment provider declines the card.", "The system keeps the fines open and informs the member."]),
        "The member owes no fines.",
    ));
    r
}

fn main() {
    let out = std::env::args().nth(1).map_or_else(|| PathBuf::from(DEFAULT_FIXTURES), PathBuf::from);
    fs::create_dir_all(&out).expect("create fixture dir");
    for e in fs::read_dir(&out).expect("read fixture dir") {
        let p = e.expect("dir entry").path();
        if p.extension().is_some_and(|x| x == "json") {
            fs::remove_file(p).expect("remove stale fixture");
        }
    }

    let doc = load_requirements(BUNDLED_REQUIREMENTS.as_ref(), None).expect("bundled requirements");
    let provider = Recording::new(ScriptedProvider::new(replies()), &out);
    let p = Pipeline::new(provider, StepClock::new(0, 60_000), SequentialIds::new());
    let mut s = p.start_session(doc).expect("session");
    for step in [Step::Actors, Step::Usecases, Step::Model] {
        p.run_stage(&mut s, step, None).expect("stage run");
        p.confirm(&mut s).expect("confirm");
    }
    p.run_stage(&mut s, Step::Descriptions, None).expect("descriptions");

    let left = p.provider().inner().remaining();
    assert_eq!(left, 0, "{left} scripted replies unused");
    println!("recorded {} repair round(s) into {}", s.repairs.len(), out.display());
}
