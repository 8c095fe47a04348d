import pytest


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            name = rep.nodeid.rsplit("::", 1)[-1]
            if name.startswith("test_criterion_"):
                number = int(name.split("_")[2])
                word = "PASS" if rep.passed else "FAIL"
                lines.append((number, f"CRITERION {number}: {word} ({name})"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)


# Laughter turn indices of the Bmr026-style fixture conversation (31 laugh
# events over 360 turns), plus the seven-group partition of those indices
# used by the clustering and acceptance tests.
BMR026_LAUGHTER = [13, 32, 34, 73, 78, 79, 83, 86, 109, 131, 159, 160, 161,
                   163, 170, 171, 174, 175, 184, 185, 187, 212, 237, 266,
                   283, 286, 292, 293, 313, 339, 341]

BMR026_CLUSTERS = [
    [13, 32, 34],
    [73, 78, 79, 83, 86, 109],
    [131, 159],
    [160, 161, 163, 170, 171, 174, 175],
    [184, 185, 187],
    [212, 237],
    [266, 283, 286, 292, 293, 313, 339, 341],
]

BMR026_TURNS = 360


def build_mrt(n_turns, laugh_turns, extra_sounds=None, session="Bmr026"):
    """Assemble MRT-subset markup with laugh events at the given turns.

    extra_sounds: optional {turn_index: description} for non-laugh vocal
    sounds.
    """
    extra_sounds = extra_sounds or {}
    lines = [f'<Transcript Session="{session}">']
    speakers = ["me011", "me013", "fe016", "mn015"]
    for i in range(1, n_turns + 1):
        speaker = speakers[i % len(speakers)]
        start, end = float(i * 3), float(i * 3 + 2)
        lines.append(f'<Turn StartTime="{start}" ENDTIME="{end}" '
                     f'Participant="{speaker}">')
        lines.append(f"so turn number {i} content here")
        if i in laugh_turns:
            lines.append('<VocalSound Description="laugh"/>')
        if i in extra_sounds:
            lines.append(f'<VocalSound Description="{extra_sounds[i]}"/>')
        lines.append("</Turn>")
    lines.append("</Transcript>")
    return "\n".join(lines).encode("utf-8")


@pytest.fixture
def bmr026_mrt():
    return build_mrt(BMR026_TURNS, set(BMR026_LAUGHTER),
                     extra_sounds={40: "breath-laugh", 55: "laugh-breath",
                                   60: "while talking laugh"})
