import io
import os
import unittest

from hypothesis import given
from hypothesis import strategies as st

from picotriage import errors
from picotriage.scoring import (GroundTruth, Metrics, compare_metrics, compute_metrics,
                                format_metrics, format_percent, format_ratio,
                                load_assessments, load_truths, random_baseline_accuracy,
                                score_alertness_group, score_casualty, score_field_gw,
                                score_run, score_trauma_group)
from picotriage.triage import FIELDS, Assessment, GoldenWindow

TESTDATA = os.path.join(os.path.dirname(__file__), "data")

TRUTH = {"severe_hemorrhage": "present", "respiratory_distress": "absent",
         "head_trauma": "wound", "torso_trauma": "normal",
         "lower_ext_trauma": "amputation", "upper_ext_trauma": "normal",
         "ocular_alertness": "closed", "verbal_alertness": "absent",
         "motor_alertness": "abnormal"}


def fixture(name):
    return os.path.join(TESTDATA, name)


class RubricTests(unittest.TestCase):

    def test_field_in_and_out_of_window(self):
        self.assertEqual(score_field_gw("severe_hemorrhage", "present", "present", True), 4)
        self.assertEqual(score_field_gw("severe_hemorrhage", "present", "present", False), 2)
        self.assertEqual(score_field_gw("severe_hemorrhage", "absent", "present", True), 0)
        self.assertEqual(score_field_gw("respiratory_distress", None, "absent", True), 0)
        return

    def test_trauma_group(self):
        truth = ["wound", "normal", "amputation", "normal"]
        self.assertEqual(score_trauma_group(truth, truth), 2)
        self.assertEqual(score_trauma_group(["wound", "normal", "normal", "wound"], truth), 1)
        self.assertEqual(score_trauma_group(["wound", "wound", "normal", "wound"], truth), 0)
        self.assertEqual(score_trauma_group([None, None, "amputation", "normal"], truth), 1)
        return

    def test_alertness_group(self):
        truth = ["closed", "absent", "abnormal"]
        self.assertEqual(score_alertness_group(truth, truth), 2)
        self.assertEqual(score_alertness_group(["closed", "absent", "nt"], truth), 1)
        self.assertEqual(score_alertness_group(["open", "absent", "nt"], truth), 0)
        return

    def test_unknown_label(self):
        with self.assertRaises(errors.UnknownLabel):
            score_field_gw("severe_hemorrhage", "maybe", "present", True)
        with self.assertRaises(errors.UnknownLabel):
            score_alertness_group(["closed", "asleep", "normal"], ["closed", "absent", "normal"])
        return

    def test_perfect_casualty(self):
        truth = GroundTruth("c1", TRUTH)
        score = score_casualty(Assessment("c1", 120.0, TRUTH), truth)
        self.assertEqual(score.total, 12)
        late = score_casualty(Assessment("c1", 400.0, TRUTH), truth)
        self.assertEqual(late.total, 8)
        return

    def test_first_report_mode(self):
        truth = GroundTruth("c1", TRUTH)
        a = Assessment("c1", 400.0, TRUTH, first_report=250.0)
        self.assertEqual(score_casualty(a, truth).total, 8)
        self.assertEqual(score_casualty(a, truth, mode="first_report").total, 12)
        with self.assertRaises(ValueError):
            score_casualty(a, truth, mode="last_report")
        return

    def test_window_override(self):
        truth = GroundTruth("c1", TRUTH)
        a = Assessment("c1", 120.0, TRUTH)
        self.assertEqual(score_casualty(a, truth, gw=GoldenWindow(60)).total, 8)
        self.assertEqual(score_casualty(a, truth, in_gw=True, gw=GoldenWindow(60)).total, 12)
        return

    def test_missing_or_unlocated(self):
        truth = GroundTruth("c1", TRUTH)
        self.assertEqual(score_casualty(None, truth).total, 0)
        hidden = GroundTruth("c1", TRUTH, located=False)
        score = score_casualty(Assessment("c1", 120.0, TRUTH), hidden)
        self.assertEqual(score.total, 0)
        self.assertFalse(score.located)
        return

    def test_truth_needs_every_field(self):
        partial = dict(TRUTH)
        del partial["motor_alertness"]
        with self.assertRaises(ValueError):
            GroundTruth("c1", partial)
        return


class RunTests(unittest.TestCase):

    def setUp(self):
        self.truths = load_truths(fixture("published_truth.json"))
        self.fused = load_assessments(fixture("published_fused.json"))
        self.baseline = load_assessments(fixture("published_baseline.json"))
        return

    def test_malformed_truth_record(self):
        buf = io.StringIO('[{"labels": {}}]')
        with self.assertRaises(errors.ScoringError):
            load_truths(buf)
        with self.assertRaises(errors.MalformedJson):
            load_truths(io.StringIO("[{"))
        return

    def test_fixture_shape(self):
        self.assertEqual(len(self.truths), 20)
        self.assertEqual(sum(t.located for t in self.truths), 19)
        self.assertEqual(len(self.fused), 19)
        return

    def test_rubric_totals(self):
        self.assertEqual(score_run(self.fused, self.truths).summary(), "146/240")
        self.assertEqual(score_run(self.baseline, self.truths).summary(), "47/240")
        return

    def test_score_report_dict(self):
        d = score_run(self.fused, self.truths).todict()
        self.assertEqual(d["total"], 146)
        self.assertEqual(d["maximum"], 240)
        self.assertEqual(len(d["casualties"]), 20)
        return

    def test_fused_metrics(self):
        m = compute_metrics(self.fused, self.truths)
        self.assertEqual((m.correct, m.attempts, m.possible), (96, 171, 180))
        self.assertEqual(format_ratio(m.reliability), "0.95")
        self.assertEqual(format_percent(m.performance), "53%")
        self.assertEqual(format_percent(m.accuracy), "56%")
        correct = [m.fields[f].correct for f in FIELDS]
        self.assertEqual(correct, [12, 16, 15, 11, 11, 8, 8, 7, 8])
        self.assertTrue(all(m.fields[f].attempts == 19 for f in FIELDS))
        return

    def test_baseline_metrics(self):
        m = compute_metrics(self.baseline, self.truths)
        self.assertEqual((m.correct, m.attempts), (25, 55))
        self.assertEqual(format_ratio(m.reliability), "0.31")
        self.assertEqual(format_percent(m.performance), "14%")
        self.assertEqual(format_percent(m.accuracy), "46%")
        self.assertEqual([(m.fields[f].attempts, m.fields[f].correct) for f in FIELDS],
                         [(12, 6), (6, 5), (0, 0), (0, 0), (14, 8), (14, 3),
                          (1, 0), (8, 3), (0, 0)])
        self.assertIsNone(m.fields[FIELDS[2]].accuracy)
        return

    def test_located_only(self):
        m = compute_metrics(self.fused, self.truths, located_only=True)
        self.assertEqual((m.attempts, m.possible), (171, 171))
        self.assertEqual(m.reliability, 1.0)
        return

    def test_comparison(self):
        cmp = compare_metrics(compute_metrics(self.baseline, self.truths),
                              compute_metrics(self.fused, self.truths))
        self.assertEqual(format_ratio(cmp.fold_increase), "3.84")
        self.assertAlmostEqual(cmp.reliability_delta, 116 / 180)
        text = format_metrics(cmp.fused, cmp.baseline)
        self.assertIn("3.84", text)
        self.assertIn("n/a", format_metrics(Metrics.from_counts(0, 0, 2)))
        return

    def test_random_classifier_column(self):
        baseline = compute_metrics(self.baseline, self.truths)
        text = format_metrics(compute_metrics(self.fused, self.truths), baseline)
        lines = {line.split()[0]: line for line in text.splitlines()}
        self.assertTrue(lines["field"].endswith("random"))
        self.assertIn("6/12  50%", lines["severe_hemorrhage"])
        self.assertTrue(lines["lower_ext_trauma"].endswith("33%"))
        self.assertTrue(lines["verbal_alertness"].endswith("25%"))
        d = baseline.todict()["fields"]
        self.assertEqual(d["severe_hemorrhage"]["accuracy"], 0.5)
        self.assertAlmostEqual(d["lower_ext_trauma"]["random_accuracy"], 1 / 3)
        self.assertIsNone(d["head_trauma"]["accuracy"])
        return

    def test_unknown_casualty(self):
        extra = self.fused + [Assessment("casualty-99", 10.0, TRUTH)]
        with self.assertRaises(errors.CasualtyMismatch):
            score_run(extra, self.truths)
        with self.assertRaises(errors.CasualtyMismatch):
            compute_metrics(self.fused, self.truths + self.truths[:1])
        return


class MetricsTests(unittest.TestCase):

    def test_no_attempts(self):
        m = Metrics.from_counts(0, 0, 3)
        self.assertIsNone(m.accuracy)
        self.assertEqual(format_percent(m.accuracy), "n/a")
        self.assertEqual(m.reliability, 0.0)
        self.assertEqual(m.performance, 0.0)
        return

    def test_from_counts(self):
        fused = Metrics.from_counts(96, 171, 20)
        self.assertEqual([format_ratio(fused.reliability), format_percent(fused.performance),
                          format_percent(fused.accuracy)], ["0.95", "53%", "56%"])
        baseline = Metrics.from_counts(25, 55, 20)
        self.assertEqual([format_ratio(baseline.reliability),
                          format_percent(baseline.performance),
                          format_percent(baseline.accuracy)], ["0.31", "14%", "46%"])
        return

    def test_count_bounds(self):
        with self.assertRaises(ValueError):
            Metrics.from_counts(5, 3, 1)
        with self.assertRaises(ValueError):
            Metrics.from_counts(3, 10, 1)
        return

    @given(st.integers(min_value=1, max_value=50), st.data())
    def test_performance_identity(self, casualties, data):
        attempts = data.draw(st.integers(min_value=1, max_value=9 * casualties))
        correct = data.draw(st.integers(min_value=0, max_value=attempts))
        m = Metrics.from_counts(correct, attempts, casualties)
        self.assertAlmostEqual(m.performance, m.accuracy * m.reliability, places=12)
        return

    def test_random_baseline(self):
        self.assertEqual(random_baseline_accuracy("severe_hemorrhage"), 0.5)
        self.assertEqual(random_baseline_accuracy("verbal_alertness"), 0.25)
        return


class FormatTests(unittest.TestCase):

    def test_percent_rounds_half_up_from_tenths(self):
        self.assertEqual(format_percent(25 / 55), "46%")
        self.assertEqual(format_percent(0.5), "50%")
        self.assertEqual(format_percent(0.0), "0%")
        return

    def test_ratio(self):
        self.assertEqual(format_ratio(55 / 180), "0.31")
        self.assertEqual(format_ratio(1.0), "1.00")
        self.assertEqual(format_ratio(None), "n/a")
        return

if __name__ == "__main__":
    unittest.main()
