import io
import json
import unittest

import numpy as np

from picotriage import errors
from picotriage.fusion import (CADENCE_TICK, LIKELIHOOD_PRODUCT, SCAN_COMPLETE,
                               CasualtyRecord, CasualtyRegistry, FusionPolicy,
                               FusionService, PredictionMessage, ScanComplete,
                               build_evidence, event_fromdict, ingest, match_casualty,
                               read_events, retained_messages, run_inference, write_events,
                               write_snapshots)
from picotriage.inference import infer_marginals
from picotriage.evidence import EvidenceSet
from picotriage.triage import FIELDS, VitalField, default_triage_network

NET = default_triage_network()


def label(field, value, t, source="camera", **kw):
    return PredictionMessage(source, field, t, label=value, **kw)


class MessageTests(unittest.TestCase):

    def test_exactly_one_value(self):
        with self.assertRaises(errors.InvalidMessage):
            PredictionMessage("camera", "head_trauma", 1.0)
        with self.assertRaises(errors.InvalidMessage):
            PredictionMessage("camera", "head_trauma", 1.0, label="wound", likelihood=[1, 0])
        return

    def test_malformed_records(self):
        with self.assertRaises(errors.InvalidMessage):
            event_fromdict({"source": "camera", "field": "pulse", "timestamp": 1.0,
                            "label": "wound"})
        with self.assertRaises(errors.InvalidMessage):
            event_fromdict({"source": "camera", "field": "head_trauma", "label": "wound"})
        with self.assertRaises(errors.InvalidMessage):
            event_fromdict({"event": SCAN_COMPLETE, "casualty_id": "c1"})
        with self.assertRaises(errors.InvalidMessage):
            event_fromdict([1, 2])
        return

    def test_likelihood_length(self):
        with self.assertRaises(errors.InvalidMessage):
            PredictionMessage("camera", "lower_ext_trauma", 1.0, likelihood=[0.5, 0.5])
        return

    def test_unknown_label(self):
        with self.assertRaises(errors.InvalidMessage):
            label("head_trauma", "bruised", 1.0)
        return

    def test_dict_round_trip(self):
        msg = label("ocular_alertness", "closed", 3.5, casualty_hint="c2", confidence=0.8)
        self.assertEqual(PredictionMessage.fromdict(msg.todict()), msg)
        self.assertEqual(event_fromdict(msg.todict()), msg)
        return

    def test_stream_round_trip(self):
        events = [label("head_trauma", "wound", 1.0, casualty_hint="c1"),
                  ScanComplete(2.0, casualty_id="c1")]
        buf = io.StringIO()
        write_events(events, buf)
        buf.seek(0)
        self.assertEqual(list(read_events(buf)), events)
        return


class MatchTests(unittest.TestCase):

    def setUp(self):
        self.registry = CasualtyRegistry()
        self.registry.create("near", 0.0, (1.0, 0.0))
        self.registry.create("far", 0.0, (5.0, 0.0))
        return

    def test_hint_wins(self):
        msg = label("head_trauma", "wound", 1.0, casualty_hint="c7", position=(1.0, 0.0))
        self.assertEqual(match_casualty(msg, self.registry), "c7")
        self.assertIn("c7", self.registry)
        return

    def test_nearest_within_radius(self):
        msg = label("head_trauma", "wound", 1.0, position=(0.0, 0.0))
        self.assertEqual(match_casualty(msg, self.registry, radius=2.0), "near")
        return

    def test_new_casualty_beyond_radius(self):
        msg = label("head_trauma", "wound", 1.0, position=(10.0, 10.0))
        cid = match_casualty(msg, self.registry, radius=2.0)
        self.assertNotIn(cid, ("near", "far"))
        self.assertEqual(len(self.registry), 3)
        self.assertEqual(self.registry[cid].position, (10.0, 10.0))
        return

    def test_no_position_no_hint(self):
        with self.assertRaises(errors.NoPositionNoHint):
            match_casualty(label("head_trauma", "wound", 1.0), self.registry)
        return


class IngestTests(unittest.TestCase):

    def setUp(self):
        self.record = CasualtyRecord("c1", 0.0)
        return

    def test_latest_wins_keeps_newest(self):
        ingest(label("head_trauma", "normal", 5.0), self.record)
        ingest(label("head_trauma", "wound", 9.0), self.record)
        kept = retained_messages(self.record, FusionPolicy())
        self.assertEqual([m.timestamp for m in kept], [9.0])
        return

    def test_product_keeps_all(self):
        policy = FusionPolicy(reduction=LIKELIHOOD_PRODUCT)
        ingest(label("head_trauma", "normal", 5.0), self.record, policy)
        ingest(label("head_trauma", "wound", 9.0), self.record, policy)
        self.assertEqual(len(retained_messages(self.record, policy)), 2)
        ev = build_evidence(self.record, policy, NET)
        np.testing.assert_allclose(ev.likelihood("head_trauma"), [1.0, 1.0])
        return

    def test_stale_message(self):
        ingest(label("head_trauma", "wound", 9.0), self.record)
        with self.assertRaises(errors.StaleMessage):
            ingest(label("head_trauma", "normal", 5.0), self.record)
        self.assertEqual(len(self.record.log), 1)
        return

    def test_stale_is_per_source(self):
        ingest(label("head_trauma", "wound", 9.0), self.record)
        ingest(label("head_trauma", "normal", 5.0, source="thermal"), self.record)
        self.assertEqual(len(self.record.log), 2)
        return

    def test_ingest_does_not_infer(self):
        ingest(label("head_trauma", "wound", 1.0), self.record)
        self.assertIsNone(self.record.posterior)
        self.assertTrue(self.record.dirty)
        return

    def test_order_across_keys_irrelevant(self):
        msgs = [label("head_trauma", "wound", 3.0),
                label("lower_ext_trauma", "amputation", 1.0, source="thermal"),
                label("ocular_alertness", "closed", 2.0)]
        a, b = CasualtyRecord("a", 0.0), CasualtyRecord("b", 0.0)
        for m in msgs:
            ingest(m, a)
        for m in reversed(msgs):
            ingest(m, b)
        ea, eb = build_evidence(a, FusionPolicy(), NET), build_evidence(b, FusionPolicy(), NET)
        self.assertEqual(ea.variables, eb.variables)
        for name in ea.variables:
            np.testing.assert_array_equal(ea.likelihood(name), eb.likelihood(name))
        return


class EvidenceBuildTests(unittest.TestCase):

    def test_empty_log(self):
        ev = build_evidence(CasualtyRecord("c1", 0.0), FusionPolicy(), NET)
        self.assertEqual(len(ev), 0)
        return

    def test_binary_softening(self):
        record = ingest(label("severe_hemorrhage", "present", 1.0), CasualtyRecord("c1", 0.0))
        ev = build_evidence(record, FusionPolicy(error_rate=0.1), NET)
        np.testing.assert_allclose(ev.likelihood("severe_hemorrhage"), [0.9, 0.1])
        return

    def test_three_state_softening(self):
        record = ingest(label("lower_ext_trauma", "amputation", 1.0), CasualtyRecord("c1", 0.0))
        ev = build_evidence(record, FusionPolicy(error_rate=0.1), NET)
        np.testing.assert_allclose(ev.likelihood("lower_ext_trauma"), [0.05, 0.05, 0.9])
        return

    def test_per_source_rate(self):
        policy = FusionPolicy(source_error_rates={"thermal": 0.2})
        msg = label("severe_hemorrhage", "absent", 1.0, source="thermal")
        np.testing.assert_allclose(policy.soften(msg), [0.2, 0.8])
        return

    def test_confidence(self):
        policy = FusionPolicy(use_confidence=True)
        msg = label("severe_hemorrhage", "present", 1.0, confidence=0.75)
        np.testing.assert_allclose(policy.soften(msg), [0.75, 0.25])
        return

    def test_error_rate_range(self):
        with self.assertRaises(ValueError):
            FusionPolicy(error_rate=0.5)
        with self.assertRaises(errors.BadConfig):
            FusionPolicy.fromdict({"reduction": "median"})
        return

    def test_zero_rate_equals_hard_evidence(self):
        record = ingest(label("lower_ext_trauma", "amputation", 1.0), CasualtyRecord("c1", 0.0))
        soft = infer_marginals(NET, build_evidence(record, FusionPolicy(error_rate=0.0), NET))
        hard = infer_marginals(NET, EvidenceSet(NET).set_hard("lower_ext_trauma", "amputation"))
        self.assertLessEqual(soft.max_abs_difference(hard), 1e-12)
        return

    def test_contradicting_certain_reports(self):
        policy = FusionPolicy(reduction=LIKELIHOOD_PRODUCT, error_rate=0.0)
        record = CasualtyRecord("c1", 0.0)
        ingest(label("head_trauma", "wound", 1.0), record, policy)
        ingest(label("head_trauma", "normal", 2.0), record, policy)
        with self.assertLogs("picotriage.fusion", "WARNING"):
            ev = build_evidence(record, policy, NET)
        self.assertNotIn("head_trauma", ev)
        return


class RunInferenceTests(unittest.TestCase):

    def test_empty_record_gives_prior_modes(self):
        record = CasualtyRecord("c1", 0.0)
        snap = run_inference(record, NET, SCAN_COMPLETE, 20.0)
        expected = ["absent", "absent", "normal", "normal", "normal", "normal",
                    "open", "normal", "normal"]
        self.assertEqual([snap.assessment.label(f) for f in FIELDS], expected)
        self.assertEqual(snap.assessment.timestamp, 20.0)
        self.assertIs(record.assessment, snap.assessment)
        return

    def test_amputation_raises_hemorrhage(self):
        record = ingest(label("lower_ext_trauma", "amputation", 1.0), CasualtyRecord("c1", 0.0))
        snap = run_inference(record, NET, SCAN_COMPLETE, 2.0, FusionPolicy(error_rate=0.0))
        self.assertGreater(snap.posterior.probability("severe_hemorrhage", "present"), 0.3308)
        self.assertEqual(snap.assessment.label(VitalField.severe_hemorrhage), "present")
        return

    def test_idempotent(self):
        record = ingest(label("head_trauma", "wound", 1.0), CasualtyRecord("c1", 0.0))
        a = run_inference(record, NET, CADENCE_TICK, 2.0)
        b = run_inference(record, NET, CADENCE_TICK, 2.0)
        self.assertEqual(a.posterior.max_abs_difference(b.posterior), 0.0)
        self.assertEqual(a.assessment, b.assessment)
        return

    def test_first_report_kept(self):
        record = CasualtyRecord("c1", 0.0)
        run_inference(record, NET, CADENCE_TICK, 3.0)
        snap = run_inference(record, NET, SCAN_COMPLETE, 8.0)
        self.assertEqual(snap.assessment.first_report, 3.0)
        return

    def test_unknown_trigger(self):
        with self.assertRaises(ValueError):
            run_inference(CasualtyRecord("c1", 0.0), NET, "timer", 1.0)
        return


class ServiceTests(unittest.TestCase):

    def test_cadence_ticks_only_dirty_records(self):
        service = FusionService(NET, FusionPolicy(cadence=1.0))
        events = [label("head_trauma", "wound", 0.5, casualty_hint="c1"),
                  label("torso_trauma", "wound", 0.6, casualty_hint="c2"),
                  label("head_trauma", "wound", 2.5, casualty_hint="c2")]
        snaps = list(service.replay(events, until=5.0))
        self.assertEqual([(s.assessment.casualty_id, s.assessment.timestamp) for s in snaps],
                         [("c1", 1.0), ("c2", 1.0), ("c2", 3.0)])
        self.assertTrue(all(s.assessment.trigger == CADENCE_TICK for s in snaps))
        return

    def test_scan_complete(self):
        service = FusionService(NET)
        snaps = list(service.replay([ScanComplete(0.2, casualty_id="c9")]))
        self.assertEqual(len(snaps), 1)
        self.assertEqual(snaps[0].assessment.trigger, SCAN_COMPLETE)
        self.assertEqual(snaps[0].assessment.attempts, 9)
        return

    def test_stale_messages_dropped(self):
        service = FusionService(NET)
        with self.assertLogs("picotriage.fusion", "WARNING"):
            service.submit(label("head_trauma", "wound", 9.0, casualty_hint="c1"))
            self.assertIsNone(service.submit(label("head_trauma", "normal", 5.0,
                                                   casualty_hint="c1")))
        self.assertEqual(service.dropped, 1)
        return

    def test_snapshot_stream(self):
        service = FusionService(NET)
        buf = io.StringIO()
        n = write_snapshots(service.replay([ScanComplete(0.2, casualty_id="c1"),
                                            ScanComplete(0.4, casualty_id="c2")]), buf)
        self.assertEqual(n, 2)
        buf.seek(0)
        first = json.loads(buf.readline())
        self.assertEqual(first["casualty_id"], "c1")
        self.assertEqual(first["labels"]["ocular_alertness"], "open")
        self.assertIn("max_posterior", first)
        return

    def test_position_matching(self):
        service = FusionService(NET, FusionPolicy(radius=2.0))
        list(service.replay([label("head_trauma", "wound", 0.1, position=(0.0, 0.0)),
                             label("torso_trauma", "wound", 0.2, position=(0.5, 0.5)),
                             label("torso_trauma", "wound", 0.3, position=(30.0, 0.0))],
                            until=1.0))
        self.assertEqual(len(service.registry), 2)
        self.assertEqual(sorted(service.assessments()), ["c1", "c2"])
        return

if __name__ == "__main__":
    unittest.main()
