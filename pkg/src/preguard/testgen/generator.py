import logging
import random

from typing import Sequence

from preguard.interp.interpreter import Interpreter, to_pre_outcome
from preguard.interp.types import (
    ArrayValue, DEFAULT_BUDGET, Environment, EnvValue, ObjectValue,
)
from preguard.lang.types import ArrayType, ClassType, Program, Type, BOOL, INT

from .types import GenPolicy, TestCase

logger = logging.getLogger(__name__)


def round_rng(policy: GenPolicy, round_index: int) -> random.Random:
    """
    Independent, reproducible random stream for one round
    :param policy       Generation policy (provides the base seed)
    :param round_index  Round number
    """
    return random.Random(f"{policy.rng_seed}:{round_index}")


def _gen_int(policy: GenPolicy, rng: random.Random) -> int:
    if rng.random() < policy.pool_prob:
        return rng.choice(policy.int_pool)
    return rng.randint(*policy.int_range)


def _gen_value(program: Program, t: Type, policy: GenPolicy,
               rng: random.Random, depth: int) -> EnvValue:
    if t == INT:
        return _gen_int(policy, rng)
    if t == BOOL:
        return rng.random() < 0.5
    if depth > policy.object_depth_max or rng.random() < policy.null_prob:
        return None
    match t:
        case ArrayType(elem=elem):
            length = rng.randint(*policy.array_len_range)
            return ArrayValue(tuple(
                _gen_value(program, elem, policy, rng, depth + 1)
                for _ in range(length)))
        case ClassType(name=name):
            # any subclass may show up, which is what makes bad casts reachable
            cls = rng.choice(program.subclasses(name))
            fields = sorted(program.class_table[cls].fields,
                            key=lambda f: f[0])
            return ObjectValue(cls, tuple(
                (field_name, _gen_value(program, ft, policy, rng, depth + 1))
                for field_name, ft in fields))
    return None


def generate_env(program: Program, sig: Sequence[Type], policy: GenPolicy,
                 rng: random.Random) -> Environment:
    """
    Draw one shape-compatible environment
    :param program  Program providing the class table
    :param sig      Parameter types of the entry method
    :param policy   Generation policy
    :param rng      Random stream (advanced by this call)
    """
    return Environment(tuple(_gen_value(program, t, policy, rng, 0)
                             for t in sig))


def generate_round(program: Program, target: str, policy: GenPolicy,
                   round_index: int) -> list[Environment]:
    """
    The environments of one round, without running them
    """
    rng = round_rng(policy, round_index)
    sig = program.method(target).param_types
    return [generate_env(program, sig, policy, rng)
            for _ in range(policy.envs_per_round)]


def run_round(program: Program, target: str, policy: GenPolicy,
              round_index: int, budget: int = DEFAULT_BUDGET) -> list[TestCase]:
    """
    Generate a round of environments and label each by running target
    :param program      Program holding the current precondition
    :param target       Entry (precondition) method
    :param policy       Generation policy
    :param round_index  Round number, combined with the policy seed
    :param budget       Step budget per execution
    """
    interp = Interpreter(program, budget)
    cases = [TestCase(env, to_pre_outcome(interp.run(target, env)),
                      round_index)
             for env in generate_round(program, target, policy, round_index)]
    crashes = sum(1 for c in cases if c.observed.crash is not None)
    logger.debug(f"Round {round_index} on {target}: {len(cases)} cases, "
                 f"{crashes} crashing")
    return cases
