"""
Serializers for run configurations and evaluation summaries.
"""
import math

from django.utils.translation import gettext as _
from rest_framework import serializers

from unmixing.config import GOLDEN_RATIO, Solver, SolverConfig
from unmixing.prox import Rho
from unmixing.spatial_ops import Boundary


def _finite(value):
    if not math.isfinite(value):
        raise serializers.ValidationError(_('Must be a finite number.'))
    return value


def _positive(value):
    _finite(value)
    if value <= 0:
        raise serializers.ValidationError(_('Must be greater than 0.'))
    return value


class RunConfigSerializer(serializers.Serializer):
    """Validate the key/value pairs of a run configuration file."""
    solver = serializers.ChoiceField(
        choices=[s.value for s in Solver], default=Solver.PRIMAL.value
    )
    rho = serializers.ChoiceField(choices=[r.value for r in Rho],
                                  required=False)
    lambda_tv = serializers.FloatField(min_value=0, required=False,
                                       validators=[_finite])
    sigma = serializers.FloatField(required=False, validators=[_positive])
    tau = serializers.FloatField(required=False)
    tol1 = serializers.FloatField(required=False, validators=[_positive])
    tol2 = serializers.FloatField(required=False, validators=[_positive])
    max_iter = serializers.IntegerField(min_value=1, required=False)
    boundary = serializers.ChoiceField(choices=[b.value for b in Boundary],
                                       required=False)
    inexact_tol = serializers.FloatField(min_value=0, required=False,
                                         validators=[_finite])
    seed = serializers.IntegerField(min_value=0, default=0)

    def get_fields(self):
        """Add the keys that are not valid Python identifiers."""
        fields = super().get_fields()
        fields['lambda'] = serializers.FloatField(
            min_value=0, required=False, source='lam', validators=[_finite]
        )
        fields['grid.n_r'] = serializers.IntegerField(
            min_value=1, required=False, source='grid_n_r'
        )
        fields['grid.n_c'] = serializers.IntegerField(
            min_value=1, required=False, source='grid_n_c'
        )
        return fields

    def validate_tau(self, value):
        if not 0 < value < GOLDEN_RATIO:
            msg = _('tau must lie strictly between 0 and %(bound).10f.')
            raise serializers.ValidationError(msg % {'bound': GOLDEN_RATIO})
        return value

    def validate(self, attrs):
        """Reject keys the configuration format does not define."""
        unknown = sorted(set(self.initial_data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError(
                {key: _('Unknown configuration key.') for key in unknown}
            )
        return attrs

    def solver_config(self):
        """Build the SolverConfig from validated data."""
        data = self.validated_data
        kwargs = {
            key: data[key]
            for key in ('lam', 'lambda_tv', 'sigma', 'tau', 'tol1', 'tol2',
                        'max_iter', 'inexact_tol')
            if key in data
        }
        if 'lambda_tv' in kwargs:
            kwargs['lam_tv'] = kwargs.pop('lambda_tv')
        if 'rho' in data:
            kwargs['rho'] = Rho(data['rho'])
        if 'boundary' in data:
            kwargs['boundary'] = Boundary(data['boundary'])
        return SolverConfig(**kwargs)


def format_errors(errors):
    """Flatten serializer errors into `key: message` lines."""
    lines = []
    for key, messages in errors.items():
        if isinstance(messages, dict):
            messages = [f'{k}: {" ".join(map(str, v))}'
                        for k, v in messages.items()]
        lines.append(f'{key}: {" ".join(str(m) for m in messages)}')
    return '\n'.join(lines)


class FiniteFloatField(serializers.FloatField):
    """Float output that renders +/-inf and NaN as null."""

    def to_representation(self, value):
        value = float(value)
        return value if math.isfinite(value) else None


class RunEvaluationSerializer(serializers.Serializer):
    truth = serializers.CharField()
    estimate = serializers.CharField()
    sre_db = FiniteFloatField()
    p_s = serializers.FloatField()
    iterations = serializers.IntegerField(required=False, allow_null=True)
    runtime_s = FiniteFloatField(required=False, allow_null=True)
    termination = serializers.CharField(required=False, allow_null=True)


class EvaluationSummarySerializer(serializers.Serializer):
    """Per-run metrics plus mean and standard deviation across runs."""
    threshold = serializers.FloatField()
    runs = RunEvaluationSerializer(many=True)
    sre_db_mean = FiniteFloatField()
    sre_db_std = FiniteFloatField()
    p_s_mean = serializers.FloatField()
    p_s_std = serializers.FloatField()
