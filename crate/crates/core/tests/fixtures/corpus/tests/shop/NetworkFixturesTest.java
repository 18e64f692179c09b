package shop;

import static org.junit.Assert.assertNotNull;
import static org.junit.Assert.assertTrue;

import java.io.IOException;
import java.net.Socket;
import java.net.URL;

import org.junit.Test;

public class NetworkFixturesTest {

    @Test
    public void openSocket() throws IOException {
        Socket s = new Socket("localhost", 8080);
        s.getOutputStream().write(1);
        s.close();
    }

    @Test
    public void connectedSocket() throws IOException {
        Socket s = new Socket("localhost", 8080);
        assertTrue(s.isConnected());
    }

    @Test
    public void fetchUrl() throws IOException {
        URL url = new URL("http://example.com");
        assertNotNull(url.openConnection());
    }
}
