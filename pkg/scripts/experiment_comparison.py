#!/usr/bin/env python3
"""Model fidelity of the 100 km free-space experiment, and how it moves with
distance and dark-count probability."""

from telefid.detectors import ChannelParams, DetectorParams
from telefid.fidelity import average_fidelity
from telefid.source import PumpParameter
from telefid.sweep import compare_experiment


def main():
    print(compare_experiment().summary())
    print()

    pump = PumpParameter(0.316)
    print("distance_km  eta           f_avg")
    for d in (0, 25, 50, 75, 100, 125):
        eta = ChannelParams(0.236, 0.45, d).detector().eta
        f = average_fidelity(pump, DetectorParams(eta, 1e-6)).average_fidelity
        print(f"{d:>11}  {eta:<12.4g}  {f:.4f}")
    print()

    # at 45 dB the accepted coincidences are dominated by dark counts
    eta = ChannelParams(0.236, 0.45, 100).detector().eta
    print("zeta_dc   f_avg at 100 km")
    for zeta in (1e-6, 1e-7, 1e-8, 1e-9):
        f = average_fidelity(pump, DetectorParams(eta, zeta)).average_fidelity
        print(f"{zeta:<8.0e}  {f:.4f}")


if __name__ == "__main__":
    main()
