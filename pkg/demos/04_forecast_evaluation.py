"""Out-of-sample forecasting: holdout and rolling protocols.

Splits a simulated series into training and validation segments, fits on
the training part, and evaluates one-step-ahead predictions.  The rolling
protocol refits at every origin on the growing window.
"""

from marfit import (
    BandSpec,
    BandedDesign,
    BandedConfig,
    NoiseSpec,
    fit_banded,
    gen_banded_coeffs,
    holdout_forecast_eval,
    rolling_forecast_eval,
    simulate,
)

truth = gen_banded_coeffs(BandedDesign(5, 4, BandSpec(1, 1), 0.6), seed=21)
series = simulate(truth, NoiseSpec(), T=480, seed=22)

banded_fitter = lambda s: fit_banded(s, BandedConfig()).coeffs

holdout = holdout_forecast_eval(series, split_index=400, fitter=banded_fitter)
print(f"holdout (train 1..400, {len(holdout.origins)} origins):")
print(f"  PMSE = {holdout.pmse:.5f}  PMAE = {holdout.pmae:.5f}")
print(f"  plain averages: MSE = {holdout.mse:.5f}  MAE = {holdout.mae:.5f}")

rolling = rolling_forecast_eval(series, start_t=460, end_t=479, fitter=banded_fitter)
print(f"\nrolling (refit at each origin 460..479, {len(rolling.origins)} origins):")
print(f"  MSE = {rolling.mse:.5f}  MAE = {rolling.mae:.5f}")
print("  first five per-origin Frobenius errors:", [round(float(e), 3) for e in rolling.per_step_fro[:5]])
