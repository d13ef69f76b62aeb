import os
import unittest

import numpy as np

from picotriage import errors
from picotriage.evidence import EvidenceSet
from picotriage.inference import infer_marginals
from picotriage.triage import (ARGMAX_WITH_ABSTAIN, ASSET_DIR_ENV, FIELDS, Assessment,
                               DecisionPolicy, ElicitationBand, GoldenWindow, VitalField,
                               assess, band_annotations, band_to_probability,
                               check_band_annotations, decide_assessment,
                               default_network_path, default_triage_network,
                               in_golden_window, resolve_asset)

TESTDATA = os.path.join(os.path.dirname(__file__), "data")


def flat_marginals(**overrides):
    m = {f: np.ones(f.cardinality) / f.cardinality for f in FIELDS}
    for name, vec in overrides.items():
        m[VitalField(name)] = np.asarray(vec, dtype=float)
    return m


class VitalFieldTests(unittest.TestCase):

    def test_rubric_order(self):
        self.assertEqual([f.value for f in FIELDS][:2],
                         ["severe_hemorrhage", "respiratory_distress"])
        self.assertEqual(len(FIELDS), 9)
        return

    def test_states(self):
        self.assertEqual(VitalField.ocular_alertness.states, ("open", "closed", "nt"))
        self.assertEqual(VitalField.verbal_alertness.cardinality, 4)
        return

    def test_compares_with_names(self):
        self.assertEqual(VitalField.head_trauma, "head_trauma")
        self.assertEqual(VitalField.parse("torso_trauma"), VitalField.torso_trauma)
        with self.assertRaises(ValueError):
            VitalField.parse("pulse")
        return


class BandTests(unittest.TestCase):

    def test_representatives(self):
        self.assertEqual(band_to_probability("strong", 0.3), 0.9)
        self.assertEqual(band_to_probability(ElicitationBand.moderate, 0.3), 0.5)
        self.assertEqual(band_to_probability("weak", 0.12), 0.12)
        return

    def test_intervals(self):
        self.assertTrue(ElicitationBand.strong.contains(0.95))
        self.assertFalse(ElicitationBand.strong.contains(0.7))
        self.assertTrue(ElicitationBand.moderate.contains(0.4))
        self.assertEqual(ElicitationBand.weak.interval(0.2), (0.2, 0.2))
        return

    def test_default_network_annotations_in_band(self):
        net = default_triage_network()
        annotations = list(band_annotations(net))
        self.assertGreater(len(annotations), 0)
        self.assertEqual(check_band_annotations(net), [])
        for a in annotations:
            if a.band is ElicitationBand.strong:
                self.assertTrue(0.8 <= a.probability <= 0.95)
            elif a.band is ElicitationBand.moderate:
                self.assertTrue(0.4 <= a.probability <= 0.6)
        return

    def test_out_of_band_row_reported(self):
        from picotriage import compile_network, fromfile
        net = compile_network(fromfile(os.path.join(TESTDATA, "head_ocular.bnet")))
        outside = check_band_annotations(net)
        self.assertEqual(len(outside), 1)
        self.assertEqual((outside[0].child, outside[0].key), ("ocular", ("wound",)))
        return


class DefaultNetworkTests(unittest.TestCase):

    def setUp(self):
        self.net = default_triage_network()
        return

    def test_structure(self):
        self.assertEqual(self.net.names, tuple(f.value for f in FIELDS))
        self.assertEqual(set(self.net.parents("severe_hemorrhage")),
                         {"lower_ext_trauma", "upper_ext_trauma"})
        self.assertEqual(set(self.net.children("head_trauma")),
                         {"ocular_alertness", "verbal_alertness", "motor_alertness"})
        self.assertEqual(self.net.parents("respiratory_distress"), ("torso_trauma",))
        return

    def test_ocular_closed_given_wound(self):
        p = self.net.cpt("ocular_alertness").probability("closed", ["wound"])
        self.assertEqual(p, 0.7)
        return

    def test_amputation_in_strong_band(self):
        for key in (("amputation", "normal"), ("normal", "amputation")):
            self.assertEqual(self.net.band("severe_hemorrhage", key), "strong")
            p = self.net.cpt("severe_hemorrhage").probability("present", key)
            self.assertTrue(0.8 <= p <= 0.95)
        return

    def test_prior_modes(self):
        labels = decide_assessment({f: infer_marginals(self.net)[f.value] for f in FIELDS})
        expected = ["absent", "absent", "normal", "normal", "normal", "normal",
                    "open", "normal", "normal"]
        self.assertEqual([labels[f] for f in FIELDS], expected)
        return

    def test_asset_dir_override(self):
        old = os.environ.get(ASSET_DIR_ENV)
        os.environ[ASSET_DIR_ENV] = TESTDATA
        try:
            self.assertEqual(resolve_asset("somewhere/head_ocular.bnet"),
                             os.path.join(TESTDATA, "head_ocular.bnet"))
        finally:
            if old is None:
                del os.environ[ASSET_DIR_ENV]
            else:
                os.environ[ASSET_DIR_ENV] = old
        return

    def test_resolve_asset_by_basename(self):
        self.assertEqual(resolve_asset("assets/triage_default.bnet"), default_network_path())
        return


class DecisionTests(unittest.TestCase):

    def test_argmax(self):
        labels = decide_assessment(flat_marginals(severe_hemorrhage=[0.7, 0.3]))
        self.assertEqual(labels[VitalField.severe_hemorrhage], "present")
        return

    def test_tie_goes_to_first_state(self):
        labels = decide_assessment(flat_marginals(severe_hemorrhage=[0.5, 0.5]))
        self.assertEqual(labels[VitalField.severe_hemorrhage], "present")
        self.assertEqual(labels[VitalField.verbal_alertness], "normal")
        return

    def test_abstain_below_threshold(self):
        policy = DecisionPolicy(ARGMAX_WITH_ABSTAIN, 0.5)
        labels = decide_assessment(flat_marginals(lower_ext_trauma=[0.4, 0.35, 0.25]), policy)
        self.assertIsNone(labels[VitalField.lower_ext_trauma])
        self.assertEqual(labels[VitalField.severe_hemorrhage], "present")
        return

    def test_unnormalized_input(self):
        policy = DecisionPolicy(ARGMAX_WITH_ABSTAIN, 0.6)
        labels = decide_assessment(flat_marginals(severe_hemorrhage=[7.0, 3.0]), policy)
        self.assertEqual(labels[VitalField.severe_hemorrhage], "present")
        return

    def test_missing_field(self):
        m = flat_marginals()
        del m[VitalField.motor_alertness]
        with self.assertRaises(errors.MissingField):
            decide_assessment(m)
        return

    def test_policy_dict(self):
        policy = DecisionPolicy.fromdict({"rule": "argmax_with_abstain", "threshold": 0.4})
        self.assertEqual(DecisionPolicy.fromdict(policy.todict()), policy)
        with self.assertRaises(ValueError):
            DecisionPolicy("majority")
        return


class GoldenWindowTests(unittest.TestCase):

    def test_boundaries(self):
        gw = GoldenWindow(300)
        self.assertTrue(in_golden_window(0, gw))
        self.assertTrue(in_golden_window(300, gw))
        self.assertFalse(in_golden_window(301, gw))
        return

    def test_negative_time(self):
        with self.assertRaises(errors.NegativeTime):
            in_golden_window(-1)
        return


class AssessmentTests(unittest.TestCase):

    def test_assess_full_coverage(self):
        net = default_triage_network()
        ev = EvidenceSet(net).set_hard("lower_ext_trauma", "amputation")
        m = infer_marginals(net, ev)
        a = assess(m, "c1", 12.0, first_report=10.0, trigger="scan_complete")
        self.assertEqual(a.attempts, 9)
        self.assertEqual(a.label(VitalField.severe_hemorrhage), "present")
        self.assertAlmostEqual(a.max_posterior[VitalField.severe_hemorrhage], 0.909)
        self.assertEqual(a.report_time("first_report"), 10.0)
        self.assertEqual(a.report_time(), 12.0)
        return

    def test_dict_round_trip(self):
        a = Assessment("c3", 40.0, {"severe_hemorrhage": "absent", "head_trauma": None})
        again = Assessment.fromdict(a.todict())
        self.assertEqual(again.todict(), a.todict())
        self.assertEqual(again.attempts, 1)
        self.assertIsNone(again.label(VitalField.motor_alertness))
        return

if __name__ == "__main__":
    unittest.main()
