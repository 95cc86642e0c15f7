"""HTTP service: request validation, domain errors, end-to-end pipeline."""

from __future__ import annotations

import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from blinklink import SOS_PAYLOAD, ecc_encode
from blinklink.service import create_app


FLIP_CLEAN = {"score_model": {"kind": "flip", "p": 0.0}}


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


class TestHealth:
    def test_health_reports_version(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert "version" in body


class TestEncode:
    def test_single_payload(self, client):
        response = client.post("/encode", json={"payload_set": [0xA5]})
        assert response.status_code == 200
        body = response.json()
        assert body["fps"] == 30.0
        assert len(body["frames"]) == 192
        assert set(body["frames"]) <= {0, 1}

    def test_payload_set_forms(self, client):
        response = client.post("/encode", json={"payload_set": {"sos": 2}})
        assert response.status_code == 200
        assert len(response.json()["frames"]) == 24 + 2 * 168

    def test_ecc_expands_nibbles(self, client):
        response = client.post("/encode", json={"payload_set": [5], "ecc": True})
        assert response.status_code == 200
        # The nibble is carried as its 8-bit codeword inside a normal packet.
        plain = client.post(
            "/encode", json={"payload_set": [ecc_encode(5)]}
        ).json()
        assert response.json()["frames"] == plain["frames"]

    def test_ecc_rejects_full_bytes(self, client):
        response = client.post("/encode", json={"payload_set": [165], "ecc": True})
        assert response.status_code == 400
        assert "nibble" in response.json()["detail"]

    def test_payload_out_of_range_is_400(self, client):
        response = client.post("/encode", json={"payload_set": [256]})
        assert response.status_code == 400

    def test_empty_payload_set_is_400(self, client):
        response = client.post("/encode", json={"payload_set": []})
        assert response.status_code == 400

    def test_unknown_field_is_422(self, client):
        response = client.post("/encode", json={"payload_set": [1], "bogus": True})
        assert response.status_code == 422

    def test_missing_required_field_is_422(self, client):
        response = client.post("/encode", json={})
        assert response.status_code == 422


class TestPipeline:
    def test_encode_simulate_decode_round_trip(self, client):
        sent = [0x00, 0x53, 0xFF]
        encoded = client.post("/encode", json={"payload_set": sent}).json()
        simulated = client.post(
            "/simulate",
            json={"frames": encoded["frames"], "fps": 30.0, "channel": FLIP_CLEAN},
        )
        assert simulated.status_code == 200
        sim = simulated.json()
        assert len(sim["scores"]) == len(encoded["frames"])
        assert len(sim["truth"]) == len(sim["scores"])

        decoded = client.post(
            "/decode", json={"scores": sim["scores"], "fps": 30.0}
        )
        assert decoded.status_code == 200
        reports = decoded.json()["reports"]
        assert [r["payload"] for r in reports] == sent
        assert all(r["status"] == "ok" for r in reports)
        assert reports[0]["packet_start"] == 24
        assert len(reports[0]["bits"]) == 12

    def test_decode_with_ecc_annotates_reports(self, client):
        encoded = client.post(
            "/encode", json={"payload_set": [9], "ecc": True}
        ).json()
        sim = client.post(
            "/simulate",
            json={"frames": encoded["frames"], "fps": 30.0, "channel": FLIP_CLEAN},
        ).json()
        decoded = client.post(
            "/decode", json={"scores": sim["scores"], "fps": 30.0, "ecc": True}
        ).json()
        report = decoded["reports"][0]
        assert report["payload"] == ecc_encode(9)
        assert report["datum"] == 9
        assert report["ecc_status"] == "clean"
        assert report["corrected_bit"] is None

    def test_simulate_drift_out_of_bounds_is_422(self, client):
        channel = dict(FLIP_CLEAN, drift=1.5)
        response = client.post(
            "/simulate", json={"frames": [0, 1], "fps": 30.0, "channel": channel}
        )
        assert response.status_code == 422


class TestAnalysis:
    def test_roc_endpoint(self, client):
        response = client.post(
            "/roc",
            json={"scores": [0.1, 0.9, 0.2, 0.8], "labels": [False, True, False, True]},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["auc"] == 1.0
        assert body["points"][0] == [0.0, 0.0]
        assert body["points"][-1] == [1.0, 1.0]

    def test_roc_degenerate_labels_is_400(self, client):
        response = client.post(
            "/roc", json={"scores": [0.1, 0.9], "labels": [True, True]}
        )
        assert response.status_code == 400

    def test_calibrate_returns_beta_model(self, client):
        response = client.post(
            "/calibrate", json={"target_auc": 0.9888, "target_acc": 0.951}
        )
        assert response.status_code == 200
        body = response.json()
        assert body["kind"] == "beta"
        assert body["a_on"] > body["b_on"] > 0
        assert abs(body["auc"] - 0.9888) <= 0.005
        assert abs(body["accuracy"] - 0.951) <= 0.005

    def test_calibrate_invalid_targets_is_400(self, client):
        response = client.post(
            "/calibrate", json={"target_auc": 0.6, "target_acc": 0.9}
        )
        assert response.status_code == 400


class TestExperiments:
    def test_experiment_summary(self, client):
        response = client.post(
            "/experiment",
            json={
                "config": {
                    "channel": FLIP_CLEAN,
                    "payload_set": {"sos": 3},
                    "trials": 2,
                }
            },
        )
        assert response.status_code == 200
        body = response.json()
        assert body["stats"]["messages_total"] == 6
        assert body["stats"]["message_success_rate"] == 1.0
        assert len(body["trials"]) == 2
        assert body["reports"] is None

    def test_experiment_with_reports(self, client):
        response = client.post(
            "/experiment",
            json={
                "config": {"channel": FLIP_CLEAN, "payload_set": [1, 2]},
                "include_reports": True,
            },
        )
        body = response.json()
        assert len(body["reports"]) == 1
        assert [r["payload"] for r in body["reports"][0]] == [1, 2]

    def test_sweep_points(self, client):
        response = client.post(
            "/sweep",
            json={
                "parameter": "flip_p",
                "grid": [0.0, 0.4],
                "base": {"channel": FLIP_CLEAN, "payload_set": [SOS_PAYLOAD] * 4},
            },
        )
        assert response.status_code == 200
        points = response.json()["points"]
        assert [p["value"] for p in points] == [0.0, 0.4]
        assert points[0]["stats"]["message_success_rate"] == 1.0
        assert points[1]["stats"]["message_success_rate"] <= 1.0

    def test_sweep_bad_grid_is_400(self, client):
        response = client.post(
            "/sweep",
            json={
                "parameter": "flip_p",
                "grid": [0.4, 0.1],
                "base": {"channel": FLIP_CLEAN, "payload_set": [1]},
            },
        )
        assert response.status_code == 400
