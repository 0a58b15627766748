"""Domain rules over records and the per-batch rule-violation rate"""
import operator

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from drift_trust.data_model import Dataset, FeatureKind, Schema
from drift_trust.exceptions import RuleDefinitionException, UnknownFeatureException

OPERATORS = {
    '<': operator.lt,
    '<=': operator.le,
    '>': operator.gt,
    '>=': operator.ge,
    '==': operator.eq,
    '!=': operator.ne,
}


@dataclass(frozen=True)
class Constraint:
    """feature <op> constant, or feature <op> another feature"""
    feature: str
    op: str
    value: Optional[float] = None
    ref: Optional[str] = None

    def describe(self) -> str:
        """Human-readable form"""
        return f'{self.feature} {self.op} {self.ref if self.ref is not None else self.value}'


@dataclass(frozen=True)
class Rule:
    """A named conjunction of constraints; a record violates the rule when any constraint fails"""
    name: str
    constraints: Tuple[Constraint, ...]
    description: str = ''

    @property
    def features(self) -> List[str]:
        """Features the rule reads"""
        names = []
        for c in self.constraints:
            names.extend(n for n in (c.feature, c.ref) if n is not None and n not in names)
        return names


DEFAULT_RULES = (
    Rule('distance_per_minute_range',
         (Constraint('Distance_per_Minute', '>=', 1.0), Constraint('Distance_per_Minute', '<=', 12.0)),
         'Distance_per_Minute within [1, 12] mi/min'),
    Rule('positive_price', (Constraint('Price_USD', '>', 0.0),), 'price above zero'),
    Rule('positive_duration', (Constraint('Flight_Duration_Minutes', '>', 0.0),), 'duration above zero'),
    Rule('fare_per_mile_range',
         (Constraint('Price_per_Mile', '>=', 0.04), Constraint('Price_per_Mile', '<=', 0.8)),
         'Price_per_Mile within [0.04, 0.8] usd/mi'),
)


def _constraint_from_dict(rule_name: str, values: Dict) -> Constraint:
    try:
        feature, op = values['feature'], values['op']
    except KeyError as exc:
        raise RuleDefinitionException(f'Rule {rule_name}: constraint is missing {exc}') from exc
    if op not in OPERATORS:
        raise RuleDefinitionException(f'Rule {rule_name}: unknown operator {op}, expected one of {list(OPERATORS)}')
    has_value, has_ref = values.get('value') is not None, values.get('ref') is not None
    if has_value == has_ref:
        raise RuleDefinitionException(f'Rule {rule_name}: a constraint needs exactly one of value or ref')
    return Constraint(feature, op, float(values['value']) if has_value else None, values.get('ref'))


def rule_from_dict(values: Dict) -> Rule:
    """Rule from its config representation"""
    name = values.get('name')
    if not name:
        raise RuleDefinitionException(f'Rule definition without a name: {values}')
    constraints = values.get('constraints') or []
    if not constraints:
        raise RuleDefinitionException(f'Rule {name} has no constraints')
    return Rule(name, tuple(_constraint_from_dict(name, c) for c in constraints), values.get('description', ''))


def rule_to_dict(rule: Rule) -> Dict:
    """Config representation of a rule"""
    constraints = []
    for c in rule.constraints:
        entry = {'feature': c.feature, 'op': c.op}
        entry.update({'ref': c.ref} if c.ref is not None else {'value': c.value})
        constraints.append(entry)
    return {'name': rule.name, 'description': rule.description, 'constraints': constraints}


def validate_rules(rules: Sequence[Rule], schema: Schema) -> List[Rule]:
    """Check every rule reads numeric features of the schema; returns the rules"""
    names = [r.name for r in rules]
    if len(set(names)) != len(names):
        raise RuleDefinitionException(f'Duplicate rule names: {names}')
    for rule in rules:
        for feature in rule.features:
            try:
                schema.require(feature, FeatureKind.NUMERIC)
            except UnknownFeatureException as exc:
                raise RuleDefinitionException(f'Rule {rule.name}: {exc}') from exc
    return list(rules)


def load_rules(definitions: Optional[Sequence[Dict]], schema: Schema) -> List[Rule]:
    """Rules from config definitions, or the defaults when none are given, validated against schema"""
    rules = DEFAULT_RULES if definitions is None else [rule_from_dict(d) for d in definitions]
    return validate_rules(rules, schema)


@dataclass(frozen=True)
class RuleEvaluation:
    """Fraction of records breaking at least one rule, and violators per rule"""
    rate: float
    counts: Dict[str, int]


def rule_violations(dataset: Dataset, rule: Rule) -> np.ndarray:
    """Boolean mask of records violating rule; a missing operand never violates"""
    frame = dataset.frame
    violated = np.zeros(len(frame), dtype=bool)
    for c in rule.constraints:
        left = frame[c.feature].to_numpy(dtype=float)
        right = frame[c.ref].to_numpy(dtype=float) if c.ref is not None else np.full(len(frame), c.value)
        known = ~np.isnan(left) & ~np.isnan(right)
        violated |= known & ~OPERATORS[c.op](left, right)
    return violated


def evaluate_rules(batch: Dataset, rules: Sequence[Rule]) -> RuleEvaluation:
    """R_t: fraction of records violating at least one rule, each record counted once"""
    if len(batch) == 0 or not rules:
        return RuleEvaluation(0.0, {rule.name: 0 for rule in rules})
    any_violation = np.zeros(len(batch), dtype=bool)
    counts = {}
    for rule in rules:
        mask = rule_violations(batch, rule)
        counts[rule.name] = int(mask.sum())
        any_violation |= mask
    return RuleEvaluation(float(any_violation.mean()), counts)
