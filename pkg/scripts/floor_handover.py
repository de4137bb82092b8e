"""Walk the scenario UEs across the floor plan and print their handovers.

Uses every bundled access point: VLC attocells interfere with one another
and the UE falls back to the strongest Wi-Fi AP when no VLC link clears
the threshold.
"""

import argparse
import csv
import sys

from hybridsim import scenario as scn, sweeps
from hybridsim.link_manager import HandoverEvent


def main():
    ap = argparse.ArgumentParser(description="floor-plan handover trace")
    ap.add_argument("--scenario", default=scn.DEFAULT_SCENARIO)
    ap.add_argument("--dt", type=float, default=0.5, help="sampling step [s]")
    ap.add_argument("--users", type=int, default=1, help="UEs sharing each VLC AP")
    args = ap.parse_args()

    sc = scn.load_scenario(args.scenario)
    events = sweeps.floor_handover_trace(sc, args.dt, args.users)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(HandoverEvent.CSV_HEADER)
    for e in events:
        w.writerow(e.row())
    print(f"# {len(events)} handovers for {len(sc.ues)} UEs", file=sys.stderr)


if __name__ == "__main__":
    main()
