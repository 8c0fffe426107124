// Cloud status pane for leader scenarios: the device list plus who leads
// and how many members it reports.

import type { Role } from "./protocol.js";
import type { ViewModel } from "./viewmodel.js";

export interface DeviceRow {
  uid: number;
  role: Role;
  score: number | null;
}

export interface CloudPane {
  devices: DeviceRow[];
  leader: number | null;
  memberCount: number | null;
  electing: boolean;
}

export function buildCloudPane(vm: ViewModel): CloudPane | null {
  if (vm.protocol !== "LEADER") {
    return null;
  }
  const devices: DeviceRow[] = [...vm.nodes.values()]
    .sort((a, b) => a.uid - b.uid)
    .map((rec) => ({
      uid: rec.uid,
      role: rec.role,
      score: typeof rec.score === "number" ? rec.score : null,
    }));
  const leaderRec = [...vm.nodes.values()]
    .filter((rec) => rec.role === "LEADER")
    .sort((a, b) => a.uid - b.uid)[0];
  return {
    devices,
    leader: leaderRec ? leaderRec.uid : null,
    memberCount:
      leaderRec && typeof leaderRec.members === "number"
        ? leaderRec.members
        : null,
    electing: devices.length > 0 && leaderRec === undefined,
  };
}
