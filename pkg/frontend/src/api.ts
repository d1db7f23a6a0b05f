/** Thin client for the session service; the console's only backend contact. */

import type { EyeStatus, SessionEvent, SessionMeta, SessionReportBody, TagFrame } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function jsonOrThrow(resp: Response): Promise<any> {
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiError(resp.status, body.detail ?? `HTTP ${resp.status}`);
  }
  return body;
}

export class ServiceClient {
  constructor(public baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  async createSession(body: Record<string, unknown>): Promise<SessionMeta> {
    const resp = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return jsonOrThrow(resp);
  }

  async getSession(id: string): Promise<SessionMeta> {
    return jsonOrThrow(await fetch(`${this.baseUrl}/sessions/${id}`));
  }

  async postTag(id: string, status: EyeStatus): Promise<TagFrame> {
    const resp = await fetch(`${this.baseUrl}/sessions/${id}/tags`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ status }),
    });
    return jsonOrThrow(resp);
  }

  async stopSession(id: string): Promise<SessionMeta> {
    const resp = await fetch(`${this.baseUrl}/sessions/${id}/stop`, { method: "POST" });
    return jsonOrThrow(resp);
  }

  async getReport(id: string): Promise<SessionReportBody> {
    return jsonOrThrow(await fetch(`${this.baseUrl}/sessions/${id}/report`));
  }

  /** One UTF-8 text frame per SessionEvent until the socket closes. */
  subscribeLive(
    id: string,
    onEvent: (event: SessionEvent) => void,
    onClose: (reason: string) => void,
  ): () => void {
    const wsBase = this.baseUrl.replace(/^http/, "ws");
    const socket = new WebSocket(`${wsBase}/sessions/${id}/live`);
    socket.onmessage = (msg) => {
      const frame = JSON.parse(msg.data as string);
      if (frame.type === "error") {
        onClose(frame.error ?? "error");
        return;
      }
      onEvent(frame as SessionEvent);
    };
    socket.onclose = (ev) => onClose(ev.reason || "closed");
    socket.onerror = () => onClose("socket error");
    return () => socket.close();
  }
}
