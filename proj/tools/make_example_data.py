#!/usr/bin/env python3
"""Regenerates data/example. Output is deterministic."""

import json
import pathlib
import random

ROOT = pathlib.Path(__file__).resolve().parent.parent
OUT = ROOT / "data" / "example"

FACTS = {
    "how long": "It started {dur} ago.",
    "past": "{hist}",
    "medication": "{meds}",
    "fever": "{fever}",
    "allerg": "{allergy}",
    "anything else": "No, that is everything. Thank you, doctor.",
}

CASES = [
    ("I have had a headache for three days.", "three days", "I had migraines as a teenager.", "I took ibuprofen twice.", "No fever.", None),
    ("I keep coughing, especially at night.", "two weeks", "I have mild asthma.", "I use an inhaler sometimes.", "A slight fever in the evenings.", None),
    ("My stomach hurts after I eat.", "about a month", "Nothing serious before.", "I take nothing regularly.", "No fever.", "I am allergic to penicillin."),
    ("I feel dizzy when I stand up.", "five days", "I have low blood pressure.", None, "No fever.", None),
    ("I have a rash on my arms that itches.", "a week", None, "I tried a cream from the pharmacy.", None, "I react to some soaps."),
    ("I have chest pain when I climb stairs.", "ten days", "My father had heart disease.", "I take aspirin daily.", None, None),
    ("My knee is swollen and painful.", "four days", "I injured it playing football last year.", "Only paracetamol.", "No fever.", None),
    ("I have trouble sleeping at night.", "three weeks", None, "I tried melatonin.", None, None),
    ("I have a sore throat and it hurts to swallow.", "two days", "I get tonsillitis often.", None, "Yes, around 38.5 degrees.", "I am allergic to amoxicillin."),
    ("My lower back hurts all the time.", "two months", "I had a slipped disc.", "I take muscle relaxants.", None, None),
    ("I feel very tired every day.", "six weeks", "I had anemia before.", "I take iron tablets.", "No fever.", None),
    ("I have diarrhea and stomach cramps.", "two days", None, "Nothing yet.", "A mild fever.", None),
    ("My eyes are red and watery.", "four days", "I have hay fever.", "I use eye drops.", None, "Pollen makes it worse."),
    ("I get short of breath when walking.", "one month", "I smoked for twenty years.", "No regular medication.", None, None),
    ("I have burning when I urinate.", "three days", "I had a bladder infection last year.", None, "Slight fever and chills.", "I am allergic to sulfa drugs."),
    ("My ankle hurts after I twisted it.", "yesterday", None, "An ice pack only.", "No fever.", None),
    ("I have been feeling anxious and my heart races.", "two weeks", "I had panic attacks in college.", "I drink a lot of coffee but take no medicine.", None, None),
    ("I have pain in my right ear.", "three days", "I had ear infections as a child.", None, "Yes, a low fever.", None),
]

CAREFUL = [
    "How long have you had this? Please tell me more about how it started.",
    "Have you had any past illnesses or surgeries?",
    "Are you taking any medication at the moment?",
    "I am sorry to hear that, it must be uncomfortable. Do you have a fever?",
    "Do you have any allergies?",
    "Thank you for explaining. This is most likely a common and treatable condition, because your symptoms are recent and you have no warning signs.",
    "I suggest a blood test and a physical examination, which will help confirm the cause.",
    "For treatment, rest, drink plenty of water and take paracetamol if needed; this relieves symptoms while you recover.",
    "If it gets worse, for example severe pain or trouble breathing, please go to the emergency department immediately.",
    "Is there anything else you would like to tell me?",
    "Please take care, and come back if you do not feel better.",
    "Goodbye, and please take care.",
]

BRIEF = [
    "What is wrong?",
    "Take some medicine.",
    "Any fever?",
    "It is probably nothing.",
    "Rest at home.",
    "Take some medicine.",
    "Rest at home.",
    "It is probably nothing.",
    "Take some medicine.",
    "Rest at home.",
    "It is probably nothing.",
    "Goodbye.",
]

# item id -> list of (substrings that must all occur, reply); first match wins.
JUDGE = {
    "1.1": [(["Doctor: How long have you had this?"], "Yes, the doctor asks about the current history.")],
    "1.2": [(["Doctor: Have you had any past illnesses"], "Yes.")],
    "1.3": [(["Please tell me more"], "Yes, open questions are used.")],
    "1.4": [(["Doctor: What is wrong?"], "Yes, plain words.")],
    "1.5": [(["this relieves symptoms"], "Yes, the purpose of treatment is explained.")],
    "1.6": [(["It is probably nothing."], "No, dismissing symptoms can be harmful."),
            ([], "Yes, nothing harmful.")],
    "1.7": [(["chest pain", "emergency department"], "Yes, the emergency risk is handled."),
            (["short of breath", "emergency department"], "Yes."),
            ([], "Not applicable here.")],
    "1.8": [(["Are you taking any medication"], "Yes.")],
    "2.1": [(["I am sorry to hear that"], "Yes, the doctor shows empathy.")],
    "2.2": [(["Take some medicine.\nPatient: I see, thank you.\nDoctor: Rest at home."], "No, the doctor keeps going in circles."),
            ([], "Yes.")],
    "2.3": [(["anxious", "I am sorry to hear that"], "Yes, reassurance is given.")],
    "2.4": [(["anything else you would like"], "Yes, the patient's wishes are invited.")],
    "2.5": [([], "Yes, no bias.")],
    "2.6": [(["Thank you for explaining"], "是的")],
    "2.7": [(["Please take care"], "Yes, polite.")],
    "2.8": [([], "Yes, no private questions.")],
    "3.1": [(["Have you had any past illnesses", "Are you taking any medication"], "Yes, the doctor cross-checks.")],
    "3.2": [(["most likely a common"], "Yes.")],
    "3.3": [(["because your symptoms are recent"], "Yes, explained.")],
    "3.4": [(["blood test"], "Yes, a diagnostic plan is given.")],
    "3.5": [(["which will help confirm the cause"], "Yes.")],
    "3.6": [(["rest, drink plenty of water"], "Yes, a treatment plan."), (["Rest at home."], "Yes, but minimal.")],
    "3.7": [(["this relieves symptoms"], "Yes.")],
}


def write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def scale_items():
    scale = json.loads((ROOT / "data" / "scale" / "llm_mini_cex.json").read_text(encoding="utf-8"))
    return scale, [i for p in scale["primary"] for i in p["item"]]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    scale, items = scale_items()
    binary = [i for i in items if i["kind"] == "binary"]

    (OUT / "self_reports.txt").write_text("".join(c[0] + "\n" for c in CASES), encoding="utf-8")

    cases = []
    for report, dur, hist, meds, fever, allergy in CASES:
        values = {"how long": dur, "past": hist, "medication": meds, "fever": fever, "allerg": allergy}
        facts = []
        for key, template in FACTS.items():
            if key in values and values[key] is None:
                continue
            text = template.format(dur=dur, hist=hist, meds=meds, fever=fever, allergy=allergy)
            facts.append({"keywords": [key], "fact": text})
        cases.append({"self_report": report, "facts": facts})
    write_json(OUT / "facts.json", {"fallback": "I see, thank you.", "cases": cases})

    write_json(OUT / "doctor_careful.json", {"model": "careful-doctor", "replies": CAREFUL})
    write_json(OUT / "doctor_brief.json", {"model": "brief-doctor", "replies": BRIEF})

    rules = []
    for item in binary:
        criterion = "Evaluation criterion: " + item["text"] + "\n"
        for subs, reply in JUDGE.get(item["id"], []):
            rules.append({"all_of": [criterion] + subs, "reply": reply})
    write_json(OUT / "mock_judge.json", {"model": "mock-judge", "rules": rules, "default": "Not satisfied."})

    # Expert annotations and judge output on a fixed evaluation set.
    rng = random.Random(20240501)
    ids = [f"expert-{i:03d}" for i in range(40)]
    with open(OUT / "annotations.jsonl", "w", encoding="utf-8") as ann, \
         open(OUT / "metrics_judgments.jsonl", "w", encoding="utf-8") as jud:
        for did in ids:
            truth, pred = {}, {}
            for item in binary:
                t = 1 if rng.random() < 0.7 else 0
                p = t if rng.random() < 0.85 else 1 - t
                truth[item["id"]], pred[item["id"]] = t, p
            overall = rng.choice(["Unsatisfactory", "Satisfactory", "Excellent"])
            ann.write(json.dumps({"dialogue_id": did, "labels": truth, "overall": overall}, ensure_ascii=False) + "\n")
            jud.write(json.dumps({"dialogue_id": did, "labels": pred, "overall": None}, ensure_ascii=False) + "\n")

    # Synthetic 1-5 ratings: one common factor plus a per-primary factor.
    rng = random.Random(7)
    header = [i["id"] for i in items]
    rows = []
    for _ in range(210):
        g = rng.gauss(0, 1)
        dims = {p["id"]: rng.gauss(0, 1) for p in scale["primary"]}
        row = []
        for item in items:
            pid = int(item["id"].split(".")[0])
            v = 3.4 + 0.7 * g + 0.6 * dims[pid] + rng.gauss(0, 0.6)
            row.append(str(min(5, max(1, round(v)))))
        rows.append(",".join(row))
    (OUT / "responses.csv").write_text(",".join(header) + "\n" + "\n".join(rows) + "\n", encoding="utf-8")

    manifest = {
        "scale": "../scale/llm_mini_cex.json",
        "prompts": "../prompts/v1",
        "seed": 42,
        "output_dir": "../../out/example",
        "parallelism": 4,
        "limits": {"max_utterances": 24, "per_reply_timeout_ms": 0},
        "self_reports": "self_reports.txt",
        "patient": {"endpoint": "scripted-patient", "model": "patient-simulator", "script": "facts.json"},
        "doctors": [
            {"endpoint": "scripted", "script": "doctor_careful.json"},
            {"endpoint": "scripted", "script": "doctor_brief.json"},
        ],
        "judge": {"endpoint": "mock-judge", "script": "mock_judge.json"},
        "metrics_judgments": "metrics_judgments.jsonl",
        "annotations": "annotations.jsonl",
        "responses": "responses.csv",
    }
    write_json(OUT / "manifest.json", manifest)


if __name__ == "__main__":
    main()
