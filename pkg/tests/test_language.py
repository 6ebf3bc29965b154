import math

import pytest
from hypothesis import given, strategies as st

from fpc.language import (
    AXES,
    Clause,
    CorrectionDelta,
    CorrectionText,
    GripperEvent,
    Magnitude,
    MalformedResponseError,
    ParsedCorrection,
    Thresholds,
    Verdict,
    build_prompt,
    compose_answer,
    discretize,
    parse_response,
)

TH = Thresholds()

ANSWER_LIMITATIONS = (
    "The direction must be chosen from the following options: move up, move "
    "down, move left, move right, rotate clockwise, and rotate "
    "counterclockwise. At most one option can be selected from each pair: "
    "move up or move down, move left or move right, and rotate clockwise or "
    "rotate counterclockwise. The magnitude should be either large or small. "
    "Your response should start with 'Yes' or 'No'. If the answer is 'No', "
    "then include the direction and magnitude of both movement and rotation."
)


class TestThresholds:
    def test_defaults(self):
        assert TH.small == 0.01
        assert TH.large == 0.1
        assert TH.step_small == 0.01
        assert TH.step_large == 0.1

    def test_ordering_enforced(self):
        with pytest.raises(ValueError):
            Thresholds(small=0.1, large=0.01)
        with pytest.raises(ValueError):
            Thresholds(step_small=0.2, step_large=0.1)


class TestDiscretize:
    def test_all_below_small_is_empty(self):
        text = discretize(CorrectionDelta(0.005, -0.008, 0.0, 0.0), TH)
        assert text.is_empty()

    def test_mixed_bins(self):
        text = discretize(CorrectionDelta(0.05, 0.0, 0.2, -0.02), TH)
        assert [(c.axis, c.direction, c.magnitude) for c in text.clauses] == [
            ("x", "forward", Magnitude.SMALL),
            ("z", "up", Magnitude.LARGE),
            ("rz", "clockwise", Magnitude.SMALL),
        ]

    def test_positive_y_is_left(self):
        text = discretize(CorrectionDelta(0.0, 0.2, 0.0, 0.0), TH)
        assert [(c.axis, c.direction, c.magnitude) for c in text.clauses] == [
            ("y", "left", Magnitude.LARGE)
        ]

    def test_bin_boundaries(self):
        # exactly small -> no clause; exactly large -> Small bin
        assert discretize(CorrectionDelta(dx=0.01), TH).is_empty()
        text = discretize(CorrectionDelta(dx=0.1), TH)
        assert text.clauses[0].magnitude is Magnitude.SMALL

    def test_all_eight_directions(self):
        text = discretize(CorrectionDelta(-0.05, -0.05, -0.05, 0.05), TH)
        assert [c.direction for c in text.clauses] == [
            "backward", "right", "down", "counterclockwise",
        ]


class TestComposeAnswer:
    def test_empty_is_yes(self):
        assert compose_answer(CorrectionText(())) == "Yes."

    def test_two_clause_example(self):
        text = CorrectionText((
            Clause("y", "left", Magnitude.SMALL),
            Clause("z", "up", Magnitude.LARGE),
        ))
        assert compose_answer(text) == "No. Move left. Small. Move up. Large."

    def test_rotation_clause_example(self):
        text = CorrectionText((
            Clause("z", "down", Magnitude.LARGE),
            Clause("rz", "clockwise", Magnitude.SMALL),
        ))
        assert compose_answer(text) == "No. Move down. Large. Rotate clockwise. Small."

    def test_clause_order_validated(self):
        with pytest.raises(ValueError, match="order"):
            CorrectionText((
                Clause("z", "up", Magnitude.SMALL),
                Clause("y", "left", Magnitude.SMALL),
            ))
        with pytest.raises(ValueError, match="order"):
            CorrectionText((
                Clause("x", "forward", Magnitude.SMALL),
                Clause("x", "backward", Magnitude.SMALL),
            ))

    def test_direction_axis_mismatch_rejected(self):
        with pytest.raises(ValueError, match="not valid"):
            Clause("x", "up", Magnitude.SMALL)


class TestBuildPrompt:
    INSTRUCTION = "pick rxbar chocolate from bottom drawer and place on counter"

    def test_close_prompt_contents(self):
        prompt = build_prompt(self.INSTRUCTION, GripperEvent.CLOSE)
        assert prompt.startswith(
            f"My task is to {self.INSTRUCTION}. Should the robot arm close its "
            "gripper in the next step? If not, please specify the direction "
            "and magnitude of the gripper's movement and rotation."
        )
        assert ANSWER_LIMITATIONS in prompt
        assert prompt.endswith(
            "Here are some example responses: Example 1: Yes. Example 2: No. "
            "Move up. Large. Move left. Small. Example 3: No. Move down. "
            "Large. Rotate clockwise. Small."
        )

    def test_open_prompt_differs_only_in_verb(self):
        close = build_prompt(self.INSTRUCTION, GripperEvent.CLOSE)
        opened = build_prompt(self.INSTRUCTION, GripperEvent.OPEN)
        assert opened == close.replace("close its gripper", "open its gripper")

    def test_deterministic(self):
        a = build_prompt(self.INSTRUCTION, GripperEvent.CLOSE)
        b = build_prompt(self.INSTRUCTION, GripperEvent.CLOSE)
        assert a == b

    def test_empty_instruction_rejected(self):
        with pytest.raises(ValueError, match="nonempty"):
            build_prompt("", GripperEvent.CLOSE)
        with pytest.raises(ValueError, match="nonempty"):
            build_prompt("   ", GripperEvent.OPEN)

    def test_braces_survive(self):
        prompt = build_prompt("sort {all} the {bolts}", GripperEvent.CLOSE)
        assert "sort {all} the {bolts}" in prompt


class TestParseResponse:
    def test_yes(self):
        parsed = parse_response("Yes.", TH)
        assert parsed.verdict is Verdict.APPROVE
        assert parsed.delta.is_zero()
        assert parsed.raw_text == "Yes."

    def test_canonical_two_clause(self):
        parsed = parse_response("No. Move up. Large. Move left. Small.", TH)
        assert parsed.verdict is Verdict.CORRECT
        assert parsed.delta.as_tuple() == (0.0, 0.01, 0.1, 0.0)

    def test_canonical_rotation(self):
        parsed = parse_response("No. Move down. Large. Rotate clockwise. Small.", TH)
        assert parsed.delta.as_tuple() == (0.0, 0.0, -0.1, -0.01)

    def test_malformed_prefix(self):
        with pytest.raises(MalformedResponseError):
            parse_response("Maybe.", TH)
        with pytest.raises(MalformedResponseError):
            parse_response("", TH)
        with pytest.raises(MalformedResponseError):
            parse_response("...", TH)

    def test_lenient_case_and_punctuation(self):
        assert parse_response("yes", TH).verdict is Verdict.APPROVE
        assert parse_response("YES, looks good!", TH).verdict is Verdict.APPROVE
        parsed = parse_response("no move up large", TH)
        assert parsed.delta.dz == 0.1

    def test_missing_magnitude_defaults_small(self):
        parsed = parse_response("No. Move backward.", TH)
        assert parsed.delta.dx == -0.01

    def test_later_mention_overrides(self):
        parsed = parse_response("No. Move up. Small. Move down. Large.", TH)
        assert parsed.delta.dz == -0.1

    def test_hyphenated_counterclockwise(self):
        parsed = parse_response("No. Rotate counter-clockwise. Large.", TH)
        assert parsed.delta.drz == 0.1

    def test_unrecognized_trailing_text_ignored(self):
        parsed = parse_response(
            "No. Move left. Small. The gripper seems slightly misaligned.", TH
        )
        assert parsed.delta.as_tuple() == (0.0, 0.01, 0.0, 0.0)

    def test_magnitude_binds_to_preceding_direction(self):
        parsed = parse_response("No. Move up. Move left. Large.", TH)
        assert parsed.delta.dz == 0.01  # no magnitude before the next direction
        assert parsed.delta.dy == 0.1

    def test_custom_step_sizes(self):
        th = Thresholds(step_small=0.02, step_large=0.055)
        parsed = parse_response("No. Move up. Large. Move right. Small.", th)
        assert parsed.delta.dz == 0.055
        assert parsed.delta.dy == -0.02

    def test_strict_accepts_canonical(self):
        parsed = parse_response("No. Move up. Large. Rotate clockwise. Small.", TH, strict=True)
        assert parsed.delta.dz == 0.1
        assert parse_response("Yes.", TH, strict=True).verdict is Verdict.APPROVE

    def test_strict_rejects_sloppy(self):
        with pytest.raises(MalformedResponseError):
            parse_response("no move up large", TH, strict=True)
        with pytest.raises(MalformedResponseError):
            parse_response("Yes!", TH, strict=True)
        with pytest.raises(MalformedResponseError):
            # out of canonical axis order
            parse_response("No. Move up. Large. Move left. Small.", TH, strict=True)
        with pytest.raises(MalformedResponseError):
            # duplicate axis
            parse_response("No. Move up. Large. Move down. Small.", TH, strict=True)


class TestApproveZeroEquivalence:
    def test_parse_yes_is_exactly_zero(self):
        assert parse_response("Yes.", TH).delta.as_tuple() == (0.0, 0.0, 0.0, 0.0)

    def test_compose_empty_is_exactly_yes(self):
        assert compose_answer(discretize(CorrectionDelta(), TH)) == "Yes."

    def test_approve_with_nonzero_delta_is_invalid(self):
        with pytest.raises(ValueError, match="zero delta"):
            ParsedCorrection(Verdict.APPROVE, CorrectionDelta(dx=0.01), "Yes.")


def _axis_value(draw_sign, bin_name, th=TH):
    if bin_name == "zero":
        return 0.0
    if bin_name == "small":
        lo, hi = th.small + 1e-6, th.large - 1e-6
    else:
        lo, hi = th.large + 1e-6, 0.5
    return draw_sign * (lo + hi) / 2.0


bin_names = st.sampled_from(["zero", "small", "large"])
signs = st.sampled_from([-1.0, 1.0])


@given(bins=st.tuples(bin_names, bin_names, bin_names, bin_names),
       sgns=st.tuples(signs, signs, signs, signs),
       jitter=st.floats(min_value=-0.01, max_value=0.01))
def test_round_trip_recovers_sign_and_bin(bins, sgns, jitter):
    values = []
    for bin_name, sign in zip(bins, sgns):
        v = _axis_value(sign, bin_name)
        if bin_name == "small":
            v += sign * jitter * 0.5  # stays inside the bin
        values.append(v)
    delta = CorrectionDelta(*values)
    parsed = parse_response(compose_answer(discretize(delta, TH)), TH)
    for axis, bin_name, sign, original in zip(AXES, bins, sgns, values):
        got = parsed.delta.component(axis)
        if bin_name == "zero":
            assert got == 0.0
        else:
            assert math.copysign(1.0, got) == sign
            expected = TH.step_small if bin_name == "small" else TH.step_large
            assert abs(got) == expected


def test_vocabulary_closure():
    # every direction token compose_answer can emit parses back to its axis/sign
    for delta in (
        CorrectionDelta(0.05, 0, 0, 0), CorrectionDelta(-0.05, 0, 0, 0),
        CorrectionDelta(0, 0.05, 0, 0), CorrectionDelta(0, -0.05, 0, 0),
        CorrectionDelta(0, 0, 0.05, 0), CorrectionDelta(0, 0, -0.05, 0),
        CorrectionDelta(0, 0, 0, 0.05), CorrectionDelta(0, 0, 0, -0.05),
        CorrectionDelta(0.2, -0.2, 0.05, -0.05),
    ):
        answer = compose_answer(discretize(delta, TH))
        parsed = parse_response(answer, TH, strict=True)
        for axis in AXES:
            original = delta.component(axis)
            got = parsed.delta.component(axis)
            if abs(original) <= TH.small:
                assert got == 0.0
            else:
                assert math.copysign(1.0, got) == math.copysign(1.0, original)
