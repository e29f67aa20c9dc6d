"""End-to-end pipeline plumbing: project layout, artifact building, and
artifact file IO shared by the CLI and the benchmark harness.

A project directory holds ``src/`` (Petit sources), ``tests/`` (test
files), ``artifacts/`` (corpora, dictionary, encoder, similarities,
clusters), and ``out/`` (repair and campaign outputs).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .codesim import SimilarityTable, build_table, load_table, save_table
from .corpus import (
    EXECUTABLE,
    FILE,
    TYPE,
    extract_corpora,
    load_corpus,
    normalized,
    save_corpus,
)
from .embed import Dictionary, SkipGramConfig, load_dictionary, save_dictionary, train_skipgram
from .lexclust import ClusterMap, anneal_k, identifier_points, kmeans, load_clusters, save_clusters
from .petit import ast, parse, parse_tests, typecheck
from .petit.parser import TestSuite
from .rae import RaeConfig, load_params, save_params, train_rae
from .repair import Learned


class ArtifactError(Exception):
    """A required upstream artifact is missing or unreadable."""


@dataclass(frozen=True)
class ProjectLayout:
    root: Path

    @property
    def src(self) -> Path:
        return self.root / "src"

    @property
    def tests(self) -> Path:
        return self.root / "tests"

    @property
    def artifacts(self) -> Path:
        return self.root / "artifacts"

    @property
    def out(self) -> Path:
        return self.root / "out"

    def source_tree(self) -> dict[str, str]:
        if not self.src.is_dir():
            raise ArtifactError(f"missing source directory: {self.src}")
        return {
            str(p.relative_to(self.src)): p.read_text(encoding="utf-8")
            for p in sorted(self.src.rglob("*.pt"))
            if not p.name.endswith(".test.pt")
        }

    def test_tree(self) -> dict[str, str]:
        if not self.tests.is_dir():
            return {}
        return {
            str(p.relative_to(self.tests)): p.read_text(encoding="utf-8")
            for p in sorted(self.tests.rglob("*.test.pt"))
        }

    def load_program(self) -> ast.Program:
        tree = self.source_tree()
        if not tree:
            raise ArtifactError(f"no .pt sources under {self.src}")
        return parse(tree)

    def load_suite(self) -> TestSuite:
        return parse_tests(self.test_tree())


@dataclass(frozen=True)
class TrainSettings:
    dim: int = 32
    window: int = 10
    sg_epochs: int = 20
    rae_epochs: int = 50
    seed: int = 1
    optimizer: str = "gd"


# ---------------------------------------------------------------------------
# building artifacts in memory


def build_learned(program: ast.Program, settings: TrainSettings | None = None, **overrides) -> Learned:
    """Run the recognition and learning phases for one program revision."""
    settings = replace(settings or TrainSettings(), **overrides)
    files, types, execs = extract_corpora(program)
    files_n, types_n, execs_n = normalized(files), normalized(types), normalized(execs)
    dictionary = train_skipgram(
        files_n,
        SkipGramConfig(dim=settings.dim, window=settings.window, epochs=settings.sg_epochs, seed=settings.seed),
    )
    result = train_rae(
        files_n,
        dictionary,
        RaeConfig(epochs=settings.rae_epochs, seed=settings.seed, optimizer=settings.optimizer),
    )
    params = result.params
    tuned = Dictionary(list(params.vocab), params.embeddings.copy(), dictionary.config)
    exec_table = build_table(execs_n, params)
    type_table = build_table(types_n, params)
    points = identifier_points(params.vocab, params.embeddings)
    if len(points) >= 2:
        clusters = anneal_k(points, seed=settings.seed)
    elif points:
        clusters = kmeans(points, 1, seed=settings.seed)
    else:
        clusters = None
    return Learned(
        exec_table=exec_table,
        type_table=type_table,
        clusters=clusters,
        dictionary=tuned,
        params=params,
        word2vec=dictionary,
    )


# ---------------------------------------------------------------------------
# artifact files


def write_corpora(program: ast.Program, artifacts: Path) -> list[Path]:
    artifacts.mkdir(parents=True, exist_ok=True)
    written = []
    for corpus in extract_corpora(program):
        written.extend(save_corpus(normalized(corpus), artifacts))
    return written


def require(path: Path) -> Path:
    if not path.exists():
        raise ArtifactError(f"missing artifact: {path} (run the upstream command first)")
    return path


def write_learned(learned: Learned, artifacts: Path) -> list[Path]:
    artifacts.mkdir(parents=True, exist_ok=True)
    written = []

    def out(name: str) -> Path:
        p = artifacts / name
        written.append(p)
        return p

    save_dictionary(learned.word2vec or learned.dictionary, out("dictionary.txt"))
    save_params(learned.params, out("encoder.mat"))
    save_table(learned.type_table, out("types.similarities.txt"), out("types.similarities.sorted"))
    save_table(learned.exec_table, out("execs.similarities.txt"), out("execs.similarities.sorted"))
    if learned.clusters is not None:
        save_clusters(learned.clusters, out("classes.txt"))
    return written


def load_learned(artifacts: Path) -> Learned:
    params = load_params(require(artifacts / "encoder.mat"))
    word2vec = load_dictionary(require(artifacts / "dictionary.txt"))
    tuned = Dictionary(list(params.vocab), params.embeddings.copy(), word2vec.config)
    type_table = load_table(
        require(artifacts / "types.similarities.txt"),
        require(artifacts / "types.similarities.sorted"),
        TYPE,
    )
    exec_table = load_table(
        require(artifacts / "execs.similarities.txt"),
        require(artifacts / "execs.similarities.sorted"),
        EXECUTABLE,
    )
    classes = artifacts / "classes.txt"
    clusters = load_clusters(classes) if classes.exists() else None
    return Learned(
        exec_table=exec_table,
        type_table=type_table,
        clusters=clusters,
        dictionary=tuned,
        params=params,
        word2vec=word2vec,
    )


def load_corpora(artifacts: Path):
    for granularity in (FILE, TYPE, EXECUTABLE):
        base = {"file": "files", "type": "types", "executable": "execs"}[granularity]
        require(artifacts / f"{base}.key")
        require(artifacts / f"{base}.src")
    return (
        load_corpus(artifacts, FILE),
        load_corpus(artifacts, TYPE),
        load_corpus(artifacts, EXECUTABLE),
    )


def check_project(program: ast.Program, suite: TestSuite) -> list[str]:
    """Diagnostics for a freshly loaded project (program plus tests)."""
    return [str(d) for d in typecheck(program, suite)]
