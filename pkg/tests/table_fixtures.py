"""Published per-sentence tone-error table used by TER tests.

Each row: (utterance id, tone-bearing units, system1 TER %, system2 TER %).
Error counts are implied by the printed percentages (count = round(tbu*pct/100));
they sum to 65 and 30 respectively.
"""

TER_TABLE = [
    ("MZ000113-13", 25, 28.00, 16.00),
    ("MZ000115-13", 22, 13.64, 9.09),
    ("MZ000115-8", 30, 10.00, 3.33),
    ("MZ000115-9", 22, 18.18, 13.64),
    ("MZ000116-12", 25, 4.00, 12.00),
    ("MZ000116-13", 16, 6.25, 0.0),
    ("MZ000116-15", 18, 11.11, 5.56),
    ("MZ000116-6", 23, 21.74, 0.0),
    ("MZ000123-13", 13, 15.38, 0.0),
    ("MZ000123-19", 18, 11.11, 0.0),
    ("MZ000123-9", 18, 33.33, 0.0),
    ("MZ000124-6", 20, 15.00, 15.00),
    ("MZ00051-7", 20, 5.00, 5.00),
    ("MZ00053-17", 15, 13.33, 0.0),
    ("MZ00056-14", 29, 10.34, 10.34),
    ("MZ00056-20", 23, 13.04, 0.0),
    ("MZ00056-5", 22, 13.64, 4.55),
    ("MZ00057-13", 16, 6.25, 12.50),
    ("MZ00057-36", 15, 20.00, 6.67),
    ("MZ00058-22", 15, 13.33, 0.0),
    ("MZ00058-25", 18, 5.56, 11.11),
    ("MZ00059-8", 24, 12.50, 0.0),
    ("MZ00060-12", 18, 11.11, 5.56),
    ("MZ00060-2", 18, 5.56, 5.56),
    ("MZ00060-4", 17, 5.88, 5.88),
]

AVG_SYSTEM1 = 12.93
AVG_SYSTEM2 = 5.67

TONES_CYCLE = ("High", "Low", "Rising", "Falling")


def implied_count(tbu: int, pct: float) -> int:
    return round(tbu * pct / 100.0)


def annotations_csv(column: int) -> str:
    """Annotation CSV for one system column (2 = system1, 3 = system2)."""
    lines = ["id,n_tbu,error_index,intended_tone"]
    for row in TER_TABLE:
        raw_id, tbu = row[0], row[1]
        count = implied_count(tbu, row[column])
        if count == 0:
            lines.append(f"{raw_id},{tbu},,")
        for k in range(count):
            lines.append(f"{raw_id},{tbu},{k},{TONES_CYCLE[k % 4]}")
    return "\n".join(lines) + "\n"
