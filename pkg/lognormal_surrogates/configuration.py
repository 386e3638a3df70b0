from plumbum import local
from plumbum.typed_env import TypedEnv

from easypy.tokens import (
    Token,
    FORMAT1,
    FORMAT2,
)


PACKAGE_ROOT = local.path(__file__).dirname


class Config(TypedEnv):
    class Float(TypedEnv.Str):
        convert = staticmethod(float)

    name, version = PACKAGE_ROOT["version.info"].read().strip().split()
    name = TypedEnv.Str("LNS_NAME", default=name)

    log_level = TypedEnv.Str("LNS_LOG_LEVEL", default="info")

    tolerance = Float("LNS_TOLERANCE", default=1e-8)
    contour_tolerance = Float("LNS_CONTOUR_TOLERANCE", default=1e-6)
    solver_tolerance = Float("LNS_SOLVER_TOLERANCE", default=1e-10)
    series_max_terms = TypedEnv.Int("LNS_SERIES_MAX_TERMS", default=10000)

    seed = TypedEnv.Int("LNS_SEED", default=20240101)
    mc_samples = TypedEnv.Int("LNS_MC_SAMPLES", default=1_000_000)
    mc_batch_size = TypedEnv.Int("LNS_MC_BATCH_SIZE", default=100_000)
    worker_threads = TypedEnv.Int("LNS_WORKER_THREADS", default=4)

    fft_points = TypedEnv.Int("LNS_FFT_POINTS", default=2 ** 14)
    fft_span = Float("LNS_FFT_SPAN", default=12.0)

    _eta_mu_format = TypedEnv.Str("LNS_ETA_MU_FORMAT", default="format1")

    cascade_table2 = PACKAGE_ROOT / "data" / "cascade_table2.json"

    @property
    def eta_mu_format(self):
        fmt = Token(self._eta_mu_format.upper())
        assert fmt in {FORMAT1, FORMAT2}, f"invalid eta-mu format: {fmt}"
        return fmt

    @property
    def defaults(self):
        """Snapshot of the numeric settings, for output metadata"""
        return dict(
            tolerance=self.tolerance,
            contour_tolerance=self.contour_tolerance,
            solver_tolerance=self.solver_tolerance,
            series_max_terms=self.series_max_terms,
            seed=self.seed,
            mc_samples=self.mc_samples,
            mc_batch_size=self.mc_batch_size,
            fft_points=self.fft_points,
            fft_span=self.fft_span,
            eta_mu_format=str(self.eta_mu_format).strip("<>").lower(),
        )


CONF = Config()
