import numpy as np
import pytest
from hypothesis import settings

from disarrangement.densities import StructuredDeformationMesh, grid_mesh

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")


def random_affine(rng, N):
    return rng.normal(size=(N, N)), rng.normal(size=N), rng.normal(size=(N, N))


def random_grid_mesh(rng, N):
    divisions = tuple(int(d) for d in rng.integers(1, 4, N))
    lower = rng.uniform(-1, 0, N)
    upper = lower + rng.uniform(0.5, 2.0, N)
    return grid_mesh(divisions, lower, upper, lambda idx: random_affine(rng, N))


def random_triangle_mesh(rng, k=3):
    """Unit square cut into 2 k^2 triangles, with every interior edge declared."""
    xs = np.linspace(0, 1, k + 1)
    pts = np.array([[x, y] for x in xs for y in xs]) + 0.0
    jitter = rng.uniform(-0.3, 0.3, pts.shape) / k
    inner = np.all((pts > 0) & (pts < 1), axis=1)
    pts[inner] += jitter[inner]
    idx = lambda i, j: i * (k + 1) + j
    tris = []
    for i in range(k):
        for j in range(k):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            tris += [(a, b, c), (a, c, d)]
    maps = [random_affine(rng, 2) for _ in tris]
    cells = [{"vertices": pts[list(t)], "grad_g": g, "offset_g": o, "G": G} for t, (g, o, G) in zip(tris, maps)]
    owner = {}
    for n, t in enumerate(tris):
        for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            owner.setdefault(tuple(sorted(e)), []).append(n)
    faces = []
    for (p, q), users in owner.items():
        if len(users) != 2:
            continue
        P, Q = pts[p], pts[q]
        t = (Q - P) / np.linalg.norm(Q - P)
        nu = np.array([t[1], -t[0]])
        # orient nu from users[0] towards users[1]
        c0 = pts[list(tris[users[0]])].mean(axis=0)
        if (c0 - P) @ nu > 0:
            nu = -nu
        (g0, o0, _), (g1, o1, _) = maps[users[0]], maps[users[1]]
        faces.append({"vertices": [P, Q], "normal": nu, "jump_const": o1 - o0, "jump_grad": g1 - g0})
    return StructuredDeformationMesh(2, cells, faces)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# per-criterion summary for the acceptance module
_criteria = {}
_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criteria[item.nodeid] = mark.args


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    number, title = _criteria[report.nodeid]
    ok = report.passed
    prev = _outcomes.get(number, (title, True))
    _outcomes[number] = (title, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        title, ok = _outcomes[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}")
