"""HTTP service: contracts, validation errors, determinism."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from m3gen import grid as G
from m3gen.model import save_checkpoint
from m3gen.service import create_app


@pytest.fixture(scope="module")
def client(tiny_checkpoint_and_manifest, tmp_path_factory):
    ckpt, _ = tiny_checkpoint_and_manifest
    path = tmp_path_factory.mktemp("svc") / "model.npz"
    save_checkpoint(path, ckpt.model(), None, ckpt.epoch, ckpt.m_min, ckpt.m_max)
    app = create_app(path, max_validation_workers=2)
    return TestClient(app)


@pytest.fixture(scope="module")
def bounds(client):
    return client.get("/api/model-info").json()


class TestHealthAndInfo:
    def test_health(self, client):
        res = client.get("/api/health")
        assert res.status_code == 200
        assert res.json()["status"] == "ok"
        assert res.json()["model_loaded"] is True

    def test_model_info(self, bounds):
        assert bounds["variant"] == "avalon"
        assert bounds["width_range"] == [4, 9]
        assert bounds["height_range"] == [4, 11]
        assert bounds["m_min"] <= bounds["m_max"]
        assert bounds["valid_move_limit"] == 20
        assert bounds["moves_range"][1] == 39

    def test_503_while_loading(self, tiny_checkpoint_and_manifest, tmp_path):
        ckpt, _ = tiny_checkpoint_and_manifest
        path = tmp_path / "late.npz"
        save_checkpoint(path, ckpt.model(), None, ckpt.epoch, ckpt.m_min, ckpt.m_max)
        app = create_app(path, defer_load=True)
        with TestClient(app) as late_client:
            assert late_client.get("/api/model-info").status_code == 503
            assert late_client.post("/api/generate", json={"width": 5, "height": 6}).status_code == 503
            app.state.load_model()
            assert late_client.get("/api/model-info").status_code == 200


class TestGenerateEndpoint:
    def test_generate_level_record(self, client, bounds):
        payload = {
            "width": 5,
            "height": 6,
            "symmetry": "vertical",
            "moves": bounds["m_min"],
            "seed": 3,
        }
        res = client.post("/api/generate", json=payload)
        assert res.status_code == 200, res.text
        record = res.json()
        assert set(record) == {"grid", "symmetry", "width", "height", "median_moves", "std_moves", "split"}
        grid = np.asarray(record["grid"], dtype=np.int8)
        G.check_grid(grid)
        assert record["width"] == 5 and record["height"] == 6
        assert G.is_mirror_symmetric(grid, G.LevelSize(5, 6), G.SymmetryKind.VERTICAL)

    def test_determinism_across_requests(self, client, bounds):
        payload = {"width": 6, "height": 8, "symmetry": "quadrant", "moves": bounds["m_min"], "seed": 11}
        a = client.post("/api/generate", json=payload).json()
        b = client.post("/api/generate", json=payload).json()
        assert a == b

    def test_width_out_of_range_is_400(self, client, bounds):
        res = client.post(
            "/api/generate",
            json={"width": 10, "height": 6, "moves": bounds["m_min"]},
        )
        assert res.status_code == 400
        assert "width" in res.json()["detail"]

    def test_moves_out_of_range_is_400(self, client):
        res = client.post(
            "/api/generate", json={"width": 5, "height": 6, "moves": 39.5}
        )
        assert res.status_code == 400
        assert "difficulty out of range" in res.json()["detail"]

    def test_missing_field_is_400_with_field_name(self, client):
        res = client.post("/api/generate", json={"width": 5})
        assert res.status_code == 400
        fields = {e["field"] for e in res.json()["detail"]}
        assert "height" in fields

    def test_bad_symmetry_is_400(self, client, bounds):
        res = client.post(
            "/api/generate",
            json={"width": 5, "height": 6, "symmetry": "diagonal", "moves": bounds["m_min"]},
        )
        assert res.status_code == 400


class TestValidateEndpoint:
    def test_validate_full_board(self, client):
        grid = G.full_board().astype(int).tolist()
        res = client.post("/api/validate", json={"grid": grid, "runs": 6})
        assert res.status_code == 200
        body = res.json()
        assert set(body) == {"median_moves", "std_moves", "success_rate", "valid", "runs", "move_cap"}
        assert body["runs"] == 6
        assert body["valid"] == (body["median_moves"] <= 20)

    def test_validate_matches_direct_bot_call(self, client):
        from m3gen.bot import BotConfig, evaluate_level

        grid = G.full_board()
        res = client.post("/api/validate", json={"grid": grid.astype(int).tolist(), "runs": 5}).json()
        stats = evaluate_level(grid, BotConfig(run_count=5))
        assert res["median_moves"] == stats.median_moves
        assert res["std_moves"] == pytest.approx(stats.std_moves)
        assert res["success_rate"] == stats.success_rate

    def test_wrong_dimensions_is_400(self, client):
        grid = [[0] * 9] * 10  # 10 rows
        res = client.post("/api/validate", json={"grid": grid})
        assert res.status_code == 400
        assert "grid" in res.json()["detail"]

    def test_bad_cell_code_is_400(self, client):
        grid = np.zeros((11, 9), dtype=int)
        grid[0, 0] = 7
        res = client.post("/api/validate", json={"grid": grid.tolist()})
        assert res.status_code == 400

    def test_requests_never_mutate_the_checkpoint(self, client, bounds):
        app_ckpt = client.app.state.checkpoint
        before = {name: p.value.copy() for name, p in app_ckpt.params.items()}
        client.post(
            "/api/generate",
            json={"width": 5, "height": 6, "moves": bounds["m_min"], "seed": 1},
        )
        client.post("/api/validate", json={"grid": G.full_board().astype(int).tolist(), "runs": 3})
        for name, p in app_ckpt.params.items():
            assert np.array_equal(before[name], p.value), name

    def test_unsolvable_grid_reports_invalid(self, client):
        grid = np.full((11, 9), 1, dtype=int)
        grid[5, 4] = 2
        grid[5, 5] = 2
        grid[5, 3] = 2
        grid[4, 4] = 2  # tiny cross; cannot ever clear 60 red
        res = client.post("/api/validate", json={"grid": grid.tolist(), "runs": 4})
        assert res.status_code == 200
        assert res.json()["valid"] is False
        assert res.json()["median_moves"] == 40.0
