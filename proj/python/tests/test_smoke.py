"""Smoke tests for the Python surface; skipped when the module is absent."""

import math

import pytest

nbp = pytest.importorskip("nbp_mapping")
np = pytest.importorskip("numpy")


@pytest.fixture(scope="module")
def scene():
    return nbp.generate_scene_named("simple", 7)


def test_scene_generation_is_deterministic(scene):
    again = nbp.generate_scene_named("simple", 7)
    assert np.array_equal(scene.navgrid(), again.navgrid())
    assert scene.width > 0 and scene.height > 0


def test_scene_roundtrip(tmp_path, scene):
    path = str(tmp_path / "scene.bin")
    nbp.save_scene(scene, path)
    back = nbp.load_scene(path)
    assert np.array_equal(scene.navgrid(), back.navgrid())


def test_nav_complexity_positive(scene):
    assert nbp.nav_complexity(scene, 0.5, 1) >= 1.0


def test_depth_render_and_backprojection(scene):
    cell = scene.nav_cells()[0]
    pose = nbp.Pose(cell.x, cell.z, 0)
    depth = nbp.render_depth(scene, pose)
    arr = depth.array
    assert arr.shape == (48, 64)
    assert (arr > 0).all() and np.isfinite(arr).all()
    points = nbp.backproject(depth, pose)
    assert len(points) == arr.size


def test_coverage_metrics(scene):
    gt = nbp.gt_surface_points(scene)
    assert len(gt) > 0
    cloud = nbp.SurfelCloud(scene.cell_size)
    for p in gt:
        cloud.insert(p)
    assert nbp.coverage(gt, cloud) == pytest.approx(1.0)
    assert nbp.auc([0.5] * 10, 10) == pytest.approx(0.5)


def test_episode_runners(scene):
    cell = scene.nav_cells()[0]
    log = nbp.run_episode(scene, "random", cell.x, cell.z, 0, budget=10, seed=3)
    assert not log.aborted
    assert 0.0 < log.final_coverage <= 1.0
    series = log.coverage_series
    assert len(series) <= 11 + 1
    assert all(b >= a - 1e-12 for a, b in zip(series, series[1:]))

    fbe = nbp.run_episode(scene, "fbe", cell.x, cell.z, 0, budget=10, seed=3)
    assert fbe.final_coverage > 0.0


def test_network_prediction(tmp_path, scene):
    net = nbp.NbpNet(seed=5)
    cell = scene.nav_cells()[0]
    pose = nbp.Pose(cell.x, cell.z, 0)
    cloud = nbp.SurfelCloud(scene.cell_size)
    pred = net.predict_from_state(scene, cloud, [pose], pose)
    vm = pred.value_map
    assert vm.shape == (32, 32, nbp.NUM_YAW)
    # Zero-initialized heads on an empty state: neutral outputs.
    assert np.allclose(vm, 0.0)
    assert np.allclose(pred.obstacle_probs, 0.5)

    path = str(tmp_path / "model.ckpt")
    net.save(path)
    back = nbp.NbpNet.load(path)
    pred2 = back.predict_from_state(scene, cloud, [pose], pose)
    assert np.array_equal(pred.value_map, pred2.value_map)
