// ThreatReport -> panel sections. Keeps the server's section order and
// wording close enough that an operator can eyeball it against the CLI
// text report.

import { ThreatReport } from "./protocol.js";

export interface ReportSection {
  title: string;
  lines: string[];
}

export function reportSections(report: ThreatReport): ReportSection[] {
  const sections: ReportSection[] = [];

  const fc = report.forecast;
  sections.push({
    title: "Forecast",
    lines:
      fc === null
        ? ["No ignition forecast attached; synthetic scenario."]
        : [
            `Ignition at (${Number(fc.lat).toFixed(4)}, ${Number(fc.lon).toFixed(4)}) ` +
              `on ${fc.ignition_datetime} (confidence ${Number(fc.confidence).toFixed(2)})`,
          ],
  });

  const sup = report.suppression;
  const supLines = [
    `Helitack deployments: ${sup.helitack_count}`,
    `Water used: ${sup.water_gal} gal`,
    sup.containment_step !== null
      ? `Contained at step ${sup.containment_step} (t+${sup.containment_step} min)`
      : "Not contained within the step budget",
  ];
  for (const d of sup.drops) {
    supLines.push(
      `t+${d.sim_time_min} min: drop at (${d.row}, ${d.col}), extinguished ${d.extinguished}`,
    );
  }
  sections.push({ title: "Suppression Timeline", lines: supLines });

  const burn = report.burn;
  sections.push({
    title: "Burn Trajectory",
    lines: [
      `Final burnt cells: ${burn.final_burnt} (${Math.round(burn.final_burnt_area_m2)} m2)`,
      `Peak simultaneous burning: ${burn.peak_burning}`,
      `Steps recorded: ${burn.trajectory.length}`,
    ],
  });

  sections.push({
    title: "Advisories",
    lines:
      report.advisories.length === 0
        ? ["None."]
        : report.advisories.map((adv, i) => {
            const [r0, c0, r1, c1] = adv.zone;
            return (
              `${i + 1}. Zone rows ${r0}-${r1}, cols ${c0}-${c1} ` +
              `(priority ${adv.priority.toFixed(3)}): ${adv.rationale}`
            );
          }),
  });

  sections.push({
    title: "Contingency",
    lines: [
      `Step budget ${report.contingency.max_steps}, ` +
        `final burnt fraction ${report.contingency.final_burnt_fraction.toFixed(4)}`,
    ],
  });

  return sections;
}
