"""Writes fixture_log.ndjson and fixture_roster.csv from the attempt table below.

Symbols: d = default probe, P = probe, F = failing submission,
S = successful submission.
"""
import json
from datetime import datetime, timedelta, timezone

ROSTER = [
    ("a01", "A+"), ("a02", "A"), ("a03", "A-"), ("a04", "A"), ("a05", "A+"), ("a06", "A-"),
    ("b01", "B+"), ("b02", "B"), ("b03", "B-"), ("b04", "B"), ("b05", "B+"),
    ("c01", "C+"), ("c02", "C"), ("c03", "C-"), ("c04", "C"),
    ("d01", "D+"), ("d02", "D"), ("d03", "D-"),
]
# u01 is deliberately missing from the roster (category U).

ATTEMPTS = [
    # P7
    ("a01", "P7", "dPPFS"),
    ("a02", "P7", "PPPPPS"),
    ("a03", "P7", "P" * 72 + "FS"),  # ratio 36: outlier
    ("a04", "P7", "S"),              # bare S
    ("a05", "P7", "dPPPPPPPPPS"),
    ("a06", "P7", "PPFPPS"),
    ("b01", "P7", "PPP"),            # no code
    ("b02", "P7", "PFFS"),
    ("b03", "P7", "dFPS"),
    ("b04", "P7", "PPPS"),
    ("b05", "P7", "FS"),
    ("c01", "P7", "FFS"),
    ("c02", "P7", "dPFS"),
    ("c03", "P7", "F"),              # unsuccessful
    ("c04", "P7", "PS"),
    ("d01", "P7", "FFFS"),
    ("d02", "P7", "dS"),             # bare S once the default is dropped
    ("d03", "P7", "FPFS"),
    ("u01", "P7", "PPFS"),           # unknown grade
    # P8
    ("a01", "P8", "PPPPPPPPPPFS"),
    ("a02", "P8", "d"),              # no code
    ("a03", "P8", "dPPPS"),
    ("a04", "P8", "PPFFPS"),
    ("a05", "P8", "PPPPPPS"),
    ("a06", "P8", "PFPFPFS"),
    ("b01", "P8", "P" * 35 + "S"),   # ratio exactly 35: kept
    ("b02", "P8", "PPS"),
    ("b03", "P8", "dFS"),
    ("b04", "P8", "S"),              # bare S
    ("b05", "P8", "PFPS"),
    ("c01", "P8", "FFFF"),           # unsuccessful
    ("c02", "P8", "PFS"),
    ("c03", "P8", "dPP"),            # no code
    ("c04", "P8", "FPPS"),
    ("d01", "P8", "F"),              # unsuccessful
    ("d02", "P8", "FFS"),
    ("d03", "P8", "S"),              # bare S
    ("u01", "P8", "S"),              # bare S, unknown grade
    # P9
    ("a01", "P9", "dPPPPFS"),
    ("a02", "P9", "PPPPS"),
    ("a03", "P9", "PPPFPS"),
    ("b01", "P9", "PPFS"),
    ("b02", "P9", "FPS"),
    ("b03", "P9", "dPPS"),
    ("c01", "P9", "FS"),
    ("c02", "P9", "PFFS"),
    ("d01", "P9", "FFS"),
    ("d02", "P9", "FS"),
    ("d03", "P9", "dFFFS"),
    ("u01", "P9", "PFS"),
]

KIND = {"d": ("P", True), "P": ("P", False), "F": ("F", False), "S": ("S", False)}


def main():
    t = datetime(2024, 8, 5, 9, 0, 0, tzinfo=timezone.utc)
    payload = 0
    lines = []
    for student, problem, symbols in ATTEMPTS:
        for seq, sym in enumerate(symbols, start=1):
            kind, is_default = KIND[sym]
            payload += 1
            pid = f"pl-{payload}"
            lines.append({"rec": "payload", "id": pid,
                          "data": {"type": "probe" if kind == "P" else "submission", "fixture": True}})
            t += timedelta(seconds=30)
            lines.append({"rec": "event", "student_id": student, "problem_id": problem, "seq_no": seq,
                          "at": t.strftime("%Y-%m-%dT%H:%M:%S.000Z"), "kind": kind,
                          "is_default": is_default, "payload_ref": pid})
    with open("fixture_log.ndjson", "w") as f:
        for rec in lines:
            f.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
    with open("fixture_roster.csv", "w") as f:
        f.write("student_id,letter_grade\n")
        for sid, grade in ROSTER:
            f.write(f"{sid},{grade}\n")


if __name__ == "__main__":
    main()
