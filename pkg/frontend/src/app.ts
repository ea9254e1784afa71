import { ApiClient } from "./api.js";
import { gaugeView } from "./gauge.js";
import { patternRole, segmentSentence } from "./highlight.js";
import { buildHotkeys, DISCARD_KEY, SKIP_KEY, UNDO_KEY, HotkeyMap } from "./hotkeys.js";
import { RetryQueue } from "./retry.js";
import { SessionState } from "./state.js";
import { Candidate, DISCARD, Stats } from "./types.js";

const PAGE_SIZE = 20;
const RETRY_INTERVAL_MS = 3000;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class AnnotationApp {
  private state = new SessionState();
  private retry: RetryQueue;
  private hotkeys: HotkeyMap = { byKey: new Map(), byDecision: new Map() };
  private relations: string[] = [];
  private root: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    root: HTMLElement,
  ) {
    this.root = root;
    this.retry = new RetryQueue(
      (id, decision) => this.api.label(id, decision),
      () => this.renderBanner(),
    );
  }

  async start(): Promise<void> {
    const schema = await this.api.schema();
    this.relations = schema.relations;
    this.hotkeys = buildHotkeys(this.relations);
    this.state.setStats(await this.api.stats());
    await this.loadMore();
    document.addEventListener("keydown", (e) => this.onKey(e));
    window.setInterval(() => this.retryPending(), RETRY_INTERVAL_MS);
    this.render();
  }

  private async loadMore(): Promise<void> {
    if (this.state.exhausted) return;
    const page = await this.api.candidates(
      "unlabeled",
      this.state.nextPageToken,
      PAGE_SIZE,
    );
    this.state.enqueue(page.items);
    this.state.nextPageToken = page.next_page_token;
    if (page.next_page_token === null) this.state.exhausted = true;
  }

  private onKey(e: KeyboardEvent): void {
    if (e.metaKey || e.ctrlKey || e.altKey) return;
    const key = e.key.toLowerCase();
    if (key === UNDO_KEY) {
      this.state.undo();
      this.render();
    } else if (key === SKIP_KEY) {
      this.state.skip();
      this.render();
    } else {
      const decision = this.hotkeys.byKey.get(key);
      if (decision !== undefined) void this.decide(decision);
    }
  }

  private async decide(decision: string): Promise<void> {
    if (!this.state.current) return;
    const record = this.state.recordDecision(decision);
    this.render();
    const resp = await this.retry.submit(record.candidate.id, decision);
    if (resp) this.state.setStats(resp.stats);
    if (this.state.queued < PAGE_SIZE / 2) await this.loadMore();
    this.render();
  }

  private async retryPending(): Promise<void> {
    if (this.retry.size === 0) return;
    const resp = await this.retry.flush();
    if (resp) {
      this.state.setStats(resp.stats);
      this.render();
    }
  }

  // --- rendering ---

  private render(): void {
    this.root.replaceChildren();
    this.renderGauge(this.state.stats);
    this.renderBanner();
    const c = this.state.current;
    if (c) {
      this.root.appendChild(this.candidateCard(c));
      this.root.appendChild(this.palette());
    } else {
      this.root.appendChild(
        el("p", "done", "Queue empty. Export rules from /export/rules."),
      );
    }
  }

  private renderGauge(stats: Stats | null): void {
    const bar = el("div", "gauge");
    if (stats) {
      const g = gaugeView(stats);
      const fill = el("div", "gauge-fill");
      fill.style.width = `${g.coveragePct.toFixed(1)}%`;
      bar.appendChild(fill);
      bar.appendChild(
        el(
          "span",
          "gauge-label",
          `coverage ${g.matched} matched / ${g.unmatched} unmatched ` +
            `(${g.coveragePct.toFixed(1)}%) · candidates ${g.progressLabel} · ` +
            `session ${this.state.sessionTally}`,
        ),
      );
    }
    this.root.appendChild(bar);
  }

  private renderBanner(): void {
    let banner = this.root.querySelector<HTMLElement>(".banner");
    if (this.retry.size === 0) {
      banner?.remove();
      return;
    }
    if (!banner) {
      banner = el("div", "banner");
      this.root.prepend(banner);
    }
    banner.textContent = `offline: ${this.retry.size} decision(s) queued, retrying`;
  }

  private candidateCard(c: Candidate): HTMLElement {
    const card = el("div", "card");
    const pattern = el("div", "pattern");
    for (const tok of c.pattern) {
      pattern.appendChild(el("span", `tok tok-${patternRole(tok)}`, tok));
    }
    card.appendChild(pattern);
    card.appendChild(
      el("div", "meta", `${c.frequency} occurrences · matches ${c.match_count} sentences`),
    );
    for (const ex of c.examples) {
      const sent = el("div", "example");
      for (const seg of segmentSentence(ex)) {
        sent.appendChild(el("span", `tok tok-${seg.role}`, seg.text));
      }
      card.appendChild(sent);
    }
    return card;
  }

  private palette(): HTMLElement {
    const pal = el("div", "palette");
    for (const rel of this.relations) {
      const key = this.hotkeys.byDecision.get(rel) ?? "?";
      pal.appendChild(this.paletteButton(key, rel, rel));
    }
    pal.appendChild(this.paletteButton(DISCARD_KEY, "discard", DISCARD));
    pal.appendChild(el("span", "hint", `${UNDO_KEY}: undo · ${SKIP_KEY}: skip`));
    return pal;
  }

  private paletteButton(key: string, label: string, decision: string): HTMLElement {
    const btn = el("button", "choice");
    btn.appendChild(el("kbd", undefined, key));
    btn.appendChild(el("span", undefined, label));
    btn.addEventListener("click", () => void this.decide(decision));
    return btn;
  }
}
