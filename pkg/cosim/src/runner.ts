/**
 * Drive the chaosforge CLI and a host C++ compiler.
 *
 * The harness talks to the generator only through its public surfaces:
 * the `chaosforge` subcommands, the JSON project config, and the emitted
 * bundle files (<core>.cpp, <core>_tb.cpp, manifest.json).
 */

import { execFileSync, spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as path from "node:path";

export const CLI = process.env.COSIM_CHAOSFORGE ?? "chaosforge";
export const CXX = process.env.COSIM_CXX ?? "g++";

/** One rounding per float op: no fused multiply-adds in verification builds. */
export const CXX_FLAGS = ["-O2", "-ffp-contract=off"];

export interface BundleManifest {
  tool: string;
  tool_version: string;
  core_name: string;
  arch: number[];
  parallelism: number;
  testbench_iterations: number;
  inputs: { model_sha256: string; seed_bits: string[] };
  outputs: { core_sha256: string; testbench_sha256: string };
}

export interface RunResult {
  status: number;
  stdout: string;
  stderr: string;
}

export function chaosforge(
  command: string,
  configPath: string,
  extraArgs: string[] = [],
): string {
  return execFileSync(CLI, [command, "--config", configPath, ...extraArgs], {
    encoding: "utf8",
  });
}

export function writeConfig(dir: string, overrides: object): string {
  const configPath = path.join(dir, "project.json");
  fs.writeFileSync(configPath, JSON.stringify(overrides, null, 1));
  return configPath;
}

/** dataset + train once; later stages reuse the artifacts. */
export function prepareModel(dir: string, config: object): string {
  const configPath = writeConfig(dir, config);
  chaosforge("dataset", configPath);
  chaosforge("train", configPath);
  return configPath;
}

export function generateBundle(
  configPath: string,
  outDir: string,
  parallelism: number,
): BundleManifest {
  const dir = path.dirname(configPath);
  const config = JSON.parse(fs.readFileSync(configPath, "utf8"));
  const cfg = {
    ...config,
    codegen: { ...(config.codegen ?? {}), parallelism },
  };
  const variantConfig = path.join(dir, `project_p${parallelism}.json`);
  fs.writeFileSync(variantConfig, JSON.stringify(cfg, null, 1));
  chaosforge("codegen", variantConfig, ["--out", outDir, "--force"]);
  return readManifest(outDir);
}

export function readManifest(outDir: string): BundleManifest {
  const manifest = JSON.parse(
    fs.readFileSync(path.join(outDir, "manifest.json"), "utf8"),
  ) as BundleManifest;
  if (manifest.tool !== "chaosforge" || !manifest.outputs?.core_sha256) {
    throw new Error(`unrecognized manifest in ${outDir}`);
  }
  return manifest;
}

export function compileBundle(outDir: string, coreName: string): string {
  const exe = path.join(outDir, "tb");
  execFileSync(
    CXX,
    [
      ...CXX_FLAGS,
      path.join(outDir, `${coreName}.cpp`),
      path.join(outDir, `${coreName}_tb.cpp`),
      "-o",
      exe,
    ],
    { stdio: ["ignore", "inherit", "inherit"] },
  );
  return exe;
}

export function runTestbench(exe: string): RunResult {
  const result = spawnSync(exe, [], { encoding: "utf8" });
  return {
    status: result.status ?? -1,
    stdout: result.stdout ?? "",
    stderr: result.stderr ?? "",
  };
}

/** Compile and execute one generated bundle; returns the testbench result. */
export function cosimulate(outDir: string, coreName: string): RunResult {
  const exe = compileBundle(outDir, coreName);
  return runTestbench(exe);
}
