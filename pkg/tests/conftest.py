import numpy as np
import pytest

from ingrepair.petit import parse, parse_tests

# One file / one type / one fn / one statement.
MINI_SRC = {"t.pt": "type T { fn f() -> int { return 1; } }"}

MINI_TESTS = {"t.test.pt": "test returns_one { assert(T.f() == 1); }"}


# Multi-package program: suspicious statements land in a/one.pt.
CALC_SRC = {
    "a/one.pt": """
type Calc {
    let LIMIT: int = 100;

    fn add(x: int, y: int) -> int {
        let total: int = x + y;
        return total;
    }

    fn clamp(v: int) -> int {
        if (v > LIMIT) {
            return LIMIT;
        }
        return v;
    }
}
""",
    "a/two.pt": """
type Helper {
    fn twice(v: int) -> int {
        return v * 2;
    }
}
""",
    "b/three.pt": """
type Other {
    fn negate(v: int) -> int {
        return 0 - v;
    }
}
""",
}

CALC_TESTS = {
    "calc.test.pt": """
test add_small {
    assert(Calc.add(1, 2) == 3);
}

test clamp_low {
    assert(Calc.clamp(7) == 7);
}

test clamp_high {
    assert(Calc.clamp(300) == 100);
}

test twice {
    assert(Helper.twice(21) == 42);
}

test negate {
    assert(Other.negate(5) == 0 - 5);
}
""",
}


# The wrong-variable analogue of the paper's Math-63 example: the buggy
# exact-equality fn can only be fixed by an ingredient whose out-of-scope
# tolerance variable is substituted with an in-scope one.
MATHFIX_SRC = {
    "math/utils.pt": """
type MathUtils {
    let SAFE_MIN: float = 0.0000001;

    fn equals2(x: float, y: float) -> bool {
        return x == y;
    }

    fn equals3(x: float, y: float, eps: float) -> bool {
        return x == y || MathUtils.absf(y - x) <= eps;
    }

    fn near(a: float, b: float, tol: float) -> bool {
        return MathUtils.absf(b - a) <= tol;
    }

    fn near2(a: float, b: float, delta: float) -> bool {
        return MathUtils.absf(b - a) <= delta;
    }

    fn close(a: float, b: float) -> bool {
        return MathUtils.absf(b - a) <= SAFE_MIN;
    }

    fn absf(v: float) -> float {
        if (v < 0.0) {
            return 0.0 - v;
        }
        return v;
    }
}
""",
}

MATHFIX_TESTS = {
    "math.test.pt": """
test equal_same {
    assert(MathUtils.equals2(1.0, 1.0));
}

test equal_near {
    assert(MathUtils.equals2(0.1 + 0.2, 0.3));
}

test unequal {
    assert(!MathUtils.equals2(1.0, 2.0));
}

test eps_equal {
    assert(MathUtils.equals3(1.0, 1.5, 0.5));
}

test eps_unequal {
    assert(!MathUtils.equals3(1.0, 2.0, 0.5));
}

test near_hit {
    assert(MathUtils.near(1.0, 1.25, 0.25));
}

test near_miss {
    assert(!MathUtils.near(1.0, 2.0, 0.5));
}

test near2_hit {
    assert(MathUtils.near2(1.0, 1.25, 0.25));
}

test near2_miss {
    assert(!MathUtils.near2(1.0, 2.0, 0.5));
}

test close_hit {
    assert(MathUtils.close(1.0, 1.0));
}

test close_miss {
    assert(!MathUtils.close(1.0, 1.5));
}

test absf_neg {
    assert(MathUtils.absf(0.0 - 2.5) == 2.5);
}

test absf_pos {
    assert(MathUtils.absf(2.5) == 2.5);
}
""",
}


@pytest.fixture(scope="session")
def mini_program():
    return parse(MINI_SRC)


@pytest.fixture(scope="session")
def calc_program():
    return parse(CALC_SRC)


@pytest.fixture(scope="session")
def calc_suite():
    return parse_tests(CALC_TESTS)


@pytest.fixture(scope="session")
def mathfix_program():
    return parse(MATHFIX_SRC)


@pytest.fixture(scope="session")
def mathfix_suite():
    return parse_tests(MATHFIX_TESTS)


@pytest.fixture(scope="session")
def tiny_params():
    """Small random-but-fixed encoder parameters for kernel-level tests."""
    from ingrepair.embed import Dictionary, SkipGramConfig
    from ingrepair.rae import init_params

    rng = np.random.default_rng(7)
    vocab = [f"t{i}" for i in range(10)]
    dictionary = Dictionary(vocab, rng.normal(size=(10, 4)), SkipGramConfig(dim=4))
    return init_params(dictionary, seed=3)
