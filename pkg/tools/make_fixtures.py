#!/usr/bin/env python3
"""Generate the bundled synthetic fixture corpus.

Writes fixtures/reports.csv, fixtures/chexpert.csv, fixtures/negbio.csv and
fixtures/mock_lexicon.json. The corpus is constructed, not sampled:

* 40 reports, of which 4 (r05, r17, r28, r39) carry only the No Finding
  label in both sources and are meant to be filtered out, leaving 36.
* Retained reports come in "profiles": small groups that share the same
  clinical finding labels but differ in wording. Each profile has a plain
  variant, a near-duplicate, and/or a paraphrase that avoids the plain
  variant's vocabulary while still hitting the mock lexicon's trigger
  phrases. Paraphrase pairs are what make embedding similarity track the
  label ground truth while n-gram metrics fall away.
* r40 is all-negative under CheXpert (a zero encoded vector, so its pairs
  have no CheXpert ground truth) but not under NegBio.
* Trigger phrases only appear in texts where the corresponding finding is
  positive or uncertain, so the keyword-scanning mock labeler stays
  consistent with the label files.

Rerunning the script reproduces the files byte for byte.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

SCHEMA = [
    "Atelectasis",
    "Cardiomegaly",
    "Consolidation",
    "Edema",
    "Enlarged Cardiomediastinum",
    "Fracture",
    "Lung Lesion",
    "Lung Opacity",
    "No Finding",
    "Pleural Effusion",
    "Pleural Other",
    "Pneumonia",
    "Pneumothorax",
    "Support Devices",
]

# Scan order matters: the mock labeler emits labels in lexicon order, so
# paraphrases of the same profile produce identically ordered label lists.
LEXICON = [
    ("atelectasis", "atelectasis present"),
    ("volume loss", "atelectasis present"),
    ("cardiomegaly", "cardiomegaly present"),
    ("enlarged heart", "cardiomegaly present"),
    ("cardiac silhouette is enlarged", "cardiomegaly present"),
    ("consolidation", "consolidation present"),
    ("airspace disease", "consolidation present"),
    ("edema", "pulmonary edema present"),
    ("vascular congestion", "pulmonary edema present"),
    ("widened mediastinum", "widened cardiomediastinum"),
    ("mediastinal widening", "widened cardiomediastinum"),
    ("fracture", "rib fracture present"),
    ("nodule", "lung lesion present"),
    ("mass", "lung lesion present"),
    ("opacity", "lung opacity present"),
    ("opacification", "lung opacity present"),
    ("effusion", "pleural effusion present"),
    ("pleural fluid", "pleural effusion present"),
    ("pleural thickening", "pleural thickening present"),
    ("pneumonia", "pneumonia present"),
    ("infectious process", "pneumonia present"),
    ("pneumothorax", "pneumothorax present"),
    ("air in the pleural space", "pneumothorax present"),
    ("tube", "support devices present"),
    ("catheter", "support devices present"),
    ("pacemaker", "support devices present"),
    ("no acute", "no acute cardiopulmonary process"),
    ("lungs are clear", "no acute cardiopulmonary process"),
]

P, N, U = "1.0", "0.0", "-1.0"

# (report_id, text, chexpert assignments, negbio assignments)
# Assignment dicts list only non-missing labels; None copies chexpert.
REPORTS = [
    (
        "r01",
        "FINDINGS: Small right pleural effusion with adjacent basilar atelectasis. "
        "Heart size is normal. IMPRESSION: Small right effusion and atelectasis.",
        {"Atelectasis": P, "Pleural Effusion": P, "Cardiomegaly": N},
        None,
    ),
    (
        "r02",
        "A trace of pleural fluid layers along the right costophrenic sulcus. "
        "There is volume loss at the right lung base. Cardiac contours are within normal limits.",
        {"Atelectasis": P, "Pleural Effusion": P, "Cardiomegaly": N},
        {"Atelectasis": P, "Pleural Effusion": P, "Cardiomegaly": N, "Lung Opacity": P},
    ),
    (
        "r03",
        "FINDINGS: Small right pleural effusion with mild adjacent basilar atelectasis. "
        "Heart size is normal. IMPRESSION: Small right effusion with atelectasis.",
        {"Atelectasis": P, "Pleural Effusion": P, "Cardiomegaly": N},
        None,
    ),
    (
        "r04",
        "Moderate cardiomegaly with interstitial edema. The pleural spaces are dry.",
        {"Cardiomegaly": P, "Edema": P, "Pleural Effusion": N},
        None,
    ),
    (
        "r05",
        "No acute cardiopulmonary process.",
        {"No Finding": P},
        {"No Finding": P},
    ),
    (
        "r06",
        "Enlarged heart with mild vascular congestion, consistent with early fluid overload. "
        "The pleural spaces remain dry.",
        {"Cardiomegaly": P, "Edema": P, "Pleural Effusion": N},
        {"Cardiomegaly": P, "Edema": U, "Pleural Effusion": N},
    ),
    (
        "r07",
        "Moderate cardiomegaly with mild interstitial edema. The pleural spaces remain dry.",
        {"Cardiomegaly": P, "Edema": P, "Pleural Effusion": N},
        None,
    ),
    (
        "r08",
        "Focal consolidation in the right lower lobe, concerning for pneumonia. No pleural abnormality.",
        {"Consolidation": P, "Pneumonia": P, "Pleural Effusion": N, "Pleural Other": N},
        None,
    ),
    (
        "r09",
        "Patchy airspace disease at the right base, likely reflecting an infectious process. "
        "The pleura appear unremarkable.",
        {"Consolidation": P, "Pneumonia": U, "Pleural Effusion": N, "Pleural Other": N},
        {"Consolidation": P, "Pneumonia": P, "Pleural Effusion": N, "Pleural Other": N},
    ),
    (
        "r10",
        "Focal consolidation in the right lower lobe, worrisome for pneumonia. No pleural abnormality.",
        {"Consolidation": P, "Pneumonia": P, "Pleural Effusion": N, "Pleural Other": N},
        None,
    ),
    (
        "r11",
        "Small apical pneumothorax on the left. The lungs are otherwise well expanded.",
        {"Pneumothorax": P},
        None,
    ),
    (
        "r12",
        "A thin crescent of air in the pleural space is seen at the left apex. "
        "The remainder of both lungs is well expanded.",
        {"Pneumothorax": P},
        None,
    ),
    (
        "r13",
        "Endotracheal tube in standard position. Bibasilar atelectasis.",
        {"Support Devices": P, "Atelectasis": P},
        None,
    ),
    (
        "r14",
        "A central venous catheter terminates at the cavoatrial junction. "
        "There is volume loss at both lung bases.",
        {"Support Devices": P, "Atelectasis": P},
        {"Support Devices": P, "Atelectasis": P, "Edema": N},
    ),
    (
        "r15",
        "Endotracheal tube in standard position. Mild bibasilar atelectasis.",
        {"Support Devices": P, "Atelectasis": P},
        None,
    ),
    (
        "r16",
        "A 1 cm nodule projects over the right mid lung.",
        {"Lung Lesion": P},
        None,
    ),
    (
        "r17",
        "Lungs are clear. No acute cardiopulmonary abnormality.",
        {"No Finding": P, "Pneumothorax": N},
        {"No Finding": P, "Pleural Effusion": N},
    ),
    (
        "r18",
        "There is a rounded mass in the right mid zone measuring approximately 1 cm.",
        {"Lung Lesion": P},
        {"Lung Lesion": P, "Lung Opacity": U},
    ),
    (
        "r19",
        "A 1 cm nodule projects over the right mid lung, unchanged from prior.",
        {"Lung Lesion": P},
        None,
    ),
    (
        "r20",
        "Moderate left pleural effusion. Heart size is normal.",
        {"Pleural Effusion": P, "Cardiomegaly": N},
        None,
    ),
    (
        "r21",
        "A moderate amount of pleural fluid layers along the left hemithorax. Normal cardiac silhouette.",
        {"Pleural Effusion": P, "Cardiomegaly": N},
        None,
    ),
    (
        "r22",
        "Moderate left pleural effusion, slightly increased. Heart size is normal.",
        {"Pleural Effusion": P, "Cardiomegaly": N},
        None,
    ),
    (
        "r23",
        "FINDINGS: Stable cardiomegaly. The lungs are well aerated.\n"
        'IMPRESSION: "Stable" cardiac enlargement without acute change.',
        {"Cardiomegaly": P},
        None,
    ),
    (
        "r24",
        "The cardiac silhouette is enlarged but stable. Both lungs remain aerated.",
        {"Cardiomegaly": P},
        None,
    ),
    (
        "r25",
        "Stable cardiomegaly. The lungs remain well aerated.",
        {"Cardiomegaly": P},
        None,
    ),
    (
        "r26",
        "Hazy opacity at the left base; the differential includes early pneumonia.",
        {"Lung Opacity": P, "Pneumonia": U},
        {"Lung Opacity": P, "Pneumonia": P},
    ),
    (
        "r27",
        "Patchy opacification at the left lung base which may represent developing pneumonia.",
        {"Lung Opacity": P, "Pneumonia": U},
        {"Lung Opacity": P, "Pneumonia": P},
    ),
    (
        "r28",
        "No acute cardiopulmonary process. Unremarkable chest radiograph.",
        {"No Finding": P},
        {"No Finding": P},
    ),
    (
        "r29",
        "Acute fracture of the left sixth rib. A pacemaker overlies the left chest wall.",
        {"Fracture": P, "Support Devices": P},
        None,
    ),
    (
        "r30",
        "Displaced fracture involving the sixth left rib. Left chest wall pacemaker is again noted.",
        {"Fracture": P, "Support Devices": P},
        None,
    ),
    (
        "r31",
        "Cardiomegaly with interstitial edema and small bilateral pleural effusions.",
        {"Cardiomegaly": P, "Edema": P, "Pleural Effusion": P},
        None,
    ),
    (
        "r32",
        "Enlarged heart. Vascular congestion with a small amount of pleural fluid on both sides.",
        {"Cardiomegaly": P, "Edema": P, "Pleural Effusion": P},
        {"Cardiomegaly": P, "Edema": P, "Pleural Effusion": P, "Atelectasis": U},
    ),
    (
        "r33",
        "Cardiomegaly with mild interstitial edema and small bilateral pleural effusions.",
        {"Cardiomegaly": P, "Edema": P, "Pleural Effusion": P},
        None,
    ),
    (
        "r34",
        "Vague opacity in the retrocardiac region, question of consolidation.",
        {"Lung Opacity": P, "Consolidation": U},
        None,
    ),
    (
        "r35",
        "Ill-defined retrocardiac opacification; consolidation cannot be excluded.",
        {"Lung Opacity": P, "Consolidation": U},
        None,
    ),
    (
        "r36",
        "Chronic right pleural thickening, stable. The heart is normal in size.",
        {"Pleural Other": P, "Cardiomegaly": N},
        None,
    ),
    (
        "r37",
        "Stable chronic pleural thickening on the right. Cardiac size within normal limits.",
        {"Pleural Other": P, "Cardiomegaly": N},
        None,
    ),
    (
        "r38",
        "Left pleural fluid collection of moderate size. Heart within normal limits.",
        {"Pleural Effusion": P, "Cardiomegaly": N},
        None,
    ),
    (
        "r39",
        "Clear lungs without acute abnormality.",
        {"No Finding": P, "Fracture": N},
        {"No Finding": P},
    ),
    (
        "r40",
        "The lungs are well inflated without focal abnormality. No acute cardiopulmonary process.",
        {name: N for name in SCHEMA},
        {"No Finding": P},
    ),
]


def write_reports(path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["report_id", "text"])
        for report_id, text, _, _ in REPORTS:
            writer.writerow([report_id, text])


def write_labels(path: Path, source_index: int) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["report_id", *SCHEMA])
        for row in REPORTS:
            report_id = row[0]
            assignments = row[source_index] if row[source_index] is not None else row[2]
            writer.writerow([report_id, *[assignments.get(name, "") for name in SCHEMA]])


def write_lexicon(path: Path) -> None:
    entries = [{"pattern": pattern, "label": label} for pattern, label in LEXICON]
    path.write_text(json.dumps({"lexicon": entries}, indent=2) + "\n", encoding="utf-8")


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    write_reports(FIXTURES / "reports.csv")
    write_labels(FIXTURES / "chexpert.csv", 2)
    write_labels(FIXTURES / "negbio.csv", 3)
    write_lexicon(FIXTURES / "mock_lexicon.json")
    counts = {"reports": len(REPORTS)}
    print(json.dumps(counts))


if __name__ == "__main__":
    main()
