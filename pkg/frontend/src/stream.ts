/** Server-sent-event consumption. The incremental parser is separate from
 * the transport so tests can feed it raw chunks. */

export interface StreamEvent {
  name: string;
  data: unknown;
}

/** Incremental SSE parser: feed it arbitrary chunks, get complete events. */
export class SseParser {
  private buffer = "";

  push(chunk: string): StreamEvent[] {
    this.buffer += chunk;
    const events: StreamEvent[] = [];
    let sep: number;
    while ((sep = this.buffer.indexOf("\n\n")) !== -1) {
      const block = this.buffer.slice(0, sep);
      this.buffer = this.buffer.slice(sep + 2);
      let name = "message";
      let data = "";
      for (const line of block.split("\n")) {
        if (line.startsWith("event: ")) name = line.slice(7);
        else if (line.startsWith("data: ")) data += line.slice(6);
      }
      if (data) events.push({ name, data: JSON.parse(data) });
    }
    return events;
  }
}

export type StreamHandler = (event: StreamEvent) => void;

/** Read the session stream over fetch, dispatching each event. Resolves when
 * the server closes the stream. */
export async function consumeStream(
  url: string,
  onEvent: StreamHandler,
  fetchFn: (url: string) => Promise<Response> = fetch,
): Promise<void> {
  const response = await fetchFn(url);
  if (!response.ok || !response.body) throw new Error(`stream failed: ${response.status}`);
  const reader = response.body.getReader();
  const decoder = new TextDecoder();
  const parser = new SseParser();
  for (;;) {
    const { done, value } = await reader.read();
    if (done) break;
    for (const event of parser.push(decoder.decode(value, { stream: true }))) {
      onEvent(event);
    }
  }
}
